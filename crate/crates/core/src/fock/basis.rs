//! Occupation-number basis of the truncated bosonic Fock space.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 12;
pub const MAX_CUTOFF: usize = 16;
const BITS: u32 = 5;

/// All occupation vectors `(n₁,…,n_m)` with `Σ n_j ≤ n_max`, ordered by total
/// particle number and then lexicographically (descending in the first mode).
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    n_max: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<u64, usize>,
    /// `shells[n]..shells[n+1]` is the `n`-particle sector.
    shells: Vec<usize>,
    leakage_threshold: f64,
}

fn pack(occ: &[u8]) -> u64 {
    occ.iter().enumerate().fold(0u64, |acc, (j, &n)| acc | (u64::from(n) << (BITS * j as u32)))
}

fn compositions(n: usize, m: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == m {
        prefix.push(n as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=n).rev() {
        prefix.push(first as u8);
        compositions(n - first, m, prefix, out);
        prefix.pop();
    }
}

/// `C(n + m − 1, n)` summed over `n ≤ n_max`.
pub fn fock_dimension(modes: usize, n_max: usize) -> usize {
    let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
    (0..=n_max).map(|n| binom(n + modes - 1, n)).sum()
}

impl FockBasis {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::InvalidParameter(format!("fock modes must lie in 1..={MAX_MODES}, got {modes}")));
        }
        if n_max > MAX_CUTOFF {
            return Err(Error::InvalidParameter(format!("fock cutoff must be at most {MAX_CUTOFF}, got {n_max}")));
        }
        let mut states = Vec::with_capacity(fock_dimension(modes, n_max));
        let mut shells = vec![0];
        for n in 0..=n_max {
            compositions(n, modes, &mut Vec::with_capacity(modes), &mut states);
            shells.push(states.len());
        }
        let index = states.iter().enumerate().map(|(i, s)| (pack(s), i)).collect();
        Ok(FockBasis { modes, n_max, states, index, shells, leakage_threshold: 1e-3 })
    }

    pub fn with_leakage_threshold(mut self, threshold: f64) -> Self {
        self.leakage_threshold = threshold;
        self
    }

    pub fn leakage_threshold(&self) -> f64 {
        self.leakage_threshold
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn occupation(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.modes {
            return None;
        }
        self.index.get(&pack(occ)).copied()
    }

    pub fn particles(&self, i: usize) -> usize {
        self.states[i].iter().map(|&n| n as usize).sum()
    }

    /// Index range of the `n`-particle sector.
    pub fn shell(&self, n: usize) -> std::ops::Range<usize> {
        self.shells[n]..self.shells[n + 1]
    }

    /// `a_j|n⟩ = √n_j |n − e_j⟩`.
    pub fn annihilate(&self, i: usize, j: usize) -> Option<(usize, f64)> {
        let occ = &self.states[i];
        if occ[j] == 0 {
            return None;
        }
        let mut t = occ.clone();
        t[j] -= 1;
        Some((self.index[&pack(&t)], f64::from(occ[j]).sqrt()))
    }

    /// `a†_j|n⟩ = √(n_j+1) |n + e_j⟩`, zero on the top shell.
    pub fn create(&self, i: usize, j: usize) -> Option<(usize, f64)> {
        let occ = &self.states[i];
        let mut t = occ.clone();
        t[j] += 1;
        self.index.get(&pack(&t)).map(|&k| (k, f64::from(t[j]).sqrt()))
    }

    /// `a†_j a_k |n⟩`.
    pub fn hop(&self, i: usize, j: usize, k: usize) -> Option<(usize, f64)> {
        let (mid, a) = self.annihilate(i, k)?;
        let (out, b) = self.create(mid, j)?;
        Some((out, a * b))
    }

    /// `a_j a_k |n⟩`.
    pub fn annihilate_pair(&self, i: usize, j: usize, k: usize) -> Option<(usize, f64)> {
        let (mid, a) = self.annihilate(i, k)?;
        let (out, b) = self.annihilate(mid, j)?;
        Some((out, a * b))
    }
}
