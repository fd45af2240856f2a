//! Oracles shared by the module tests and the acceptance suite.
#![allow(dead_code)]

use std::sync::Arc;

use mfl_core::fock::*;
use mfl_core::manybody::dense_hamiltonian;
use mfl_core::potential::ScaledPotential;
use mfl_core::spectral::{ch_series, sh_series, Field, Grid, Kernel, DEFAULT_SERIES_TOL};
use mfl_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn basis_vector(basis: &Arc<FockBasis>, i: usize) -> FockState {
    let mut c = vec![zero(); basis.dim()];
    c[i] = C64::new(1.0, 0.0);
    FockState::from_coeffs(basis.clone(), c).unwrap()
}

fn low_shell_diff(basis: &FockBasis, a: &[C64], b: &[C64], low: usize) -> f64 {
    let end = basis.shell(low).end;
    a[..end].iter().zip(&b[..end]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max |⟨e_r, (e^{sA} a_j e^{-sA} − a_j − s α_j) e_c⟩|` over rows and columns
/// in shells `≤ low`, with `α_j = φ(x_j)√dx`.
pub fn weyl_shift_defect(basis: &Arc<FockBasis>, phi: &Field, s: f64, low: usize) -> f64 {
    let ops = build_ops(basis);
    let dx = phi.grid().spacing();
    let mut worst: f64 = 0.0;
    for col in 0..basis.shell(low).end {
        let e = basis_vector(basis, col);
        let shifted = weyl_displace(&e, phi, s).unwrap();
        for (j, a) in ops.annihilation.iter().enumerate() {
            let mid = FockState::from_coeffs(basis.clone(), a.matvec(shifted.coeffs())).unwrap();
            let lhs = weyl_displace(&mid, phi, -s).unwrap();
            let alpha = phi.values()[j] * dx.sqrt() * s;
            let rhs: Vec<C64> = a.matvec(e.coeffs()).iter().zip(e.coeffs()).map(|(x, y)| x + alpha * y).collect();
            worst = worst.max(low_shell_diff(basis, lhs.coeffs(), &rhs, low));
        }
    }
    worst
}

/// Defect of `e^{B} a_j e^{-B} = Σ_i ch(k)(x_i,x_j)dx a_i + sh(k)(x_i,x_j)dx a†_i`
/// on shells `≤ low`, with `ch`, `sh` from the power series.
pub fn bogoliubov_conjugation_defect(basis: &Arc<FockBasis>, k: &Kernel, low: usize) -> f64 {
    let ops = build_ops(basis);
    let m = k.points();
    let dx = k.grid().spacing();
    let sh = sh_series(k, DEFAULT_SERIES_TOL).unwrap();
    let ch = ch_series(k, DEFAULT_SERIES_TOL).unwrap();
    let mut worst: f64 = 0.0;
    for col in 0..basis.shell(low).end {
        let e = basis_vector(basis, col);
        // e^{-B} = bogoliubov_apply(·, k, 1), e^{B} = bogoliubov_apply(·, k, −1).
        let inner = bogoliubov_apply(&e, k, 1.0).unwrap();
        for j in 0..m {
            let mid = FockState::from_coeffs(basis.clone(), ops.annihilation[j].matvec(inner.coeffs())).unwrap();
            let lhs = bogoliubov_apply(&mid, k, -1.0).unwrap();
            let mut rhs = vec![zero(); basis.dim()];
            for i in 0..m {
                let c = ch.get(i, j) * dx + if i == j { C64::new(1.0, 0.0) } else { zero() };
                let s = sh.get(i, j) * dx;
                let ai = ops.annihilation[i].matvec(e.coeffs());
                let ci = ops.creation[i].matvec(e.coeffs());
                for r in 0..rhs.len() {
                    rhs[r] += c * ai[r] + s * ci[r];
                }
            }
            worst = worst.max(low_shell_diff(basis, lhs.coeffs(), &rhs, low));
        }
    }
    worst
}

/// Random complex symmetric kernel with `max |k·dx| ≤ scale`.
pub fn random_symmetric_kernel(grid: Grid, scale: f64, seed: u64) -> Kernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = grid.points();
    let dx = grid.spacing();
    let mut v = vec![zero(); m * m];
    for i in 0..m {
        for j in i..m {
            let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * (2.0 * scale / dx);
            v[i * m + j] = z;
            v[j * m + i] = z;
        }
    }
    Kernel::new(grid, v).unwrap()
}

/// Occupation state of the `N` sector as a normalized symmetric tensor.
fn symmetric_embedding(occ: &[u8], m: usize) -> Vec<(usize, f64)> {
    let n: usize = occ.iter().map(|&x| x as usize).sum();
    let mut idx = vec![0usize; n];
    let mut out = Vec::new();
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let amp = (occ.iter().map(|&x| fact(x as usize)).product::<f64>() / fact(n)).sqrt();
    loop {
        let mut counts = vec![0u8; m];
        idx.iter().for_each(|&i| counts[i] += 1);
        if counts == occ {
            out.push((idx.iter().fold(0, |acc, &i| acc * m + i), amp));
        }
        let mut a = n;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// `max |H_Fock|_N − (−S* h S)|` where `h` is the tensor Hamiltonian and `S`
/// embeds occupation states as symmetric tensors.
pub fn sector_restriction_defect(v: &ScaledPotential, n: usize) -> f64 {
    let grid = *v.grid();
    let m = grid.points();
    let basis = FockBasis::new(m, n).unwrap();
    let hf = fock_hamiltonian(&basis, v, n).unwrap();
    let h = dense_hamiltonian(&grid, n, v).unwrap();
    let dim = m.pow(n as u32);
    let shell = basis.shell(n);
    let emb: Vec<Vec<(usize, f64)>> = shell.clone().map(|i| symmetric_embedding(basis.occupation(i), m)).collect();
    let mut worst: f64 = 0.0;
    for (a, ea) in shell.clone().zip(&emb) {
        for (b, eb) in shell.clone().zip(&emb) {
            let mut s = zero();
            for &(r, x) in ea {
                for &(c, y) in eb {
                    s += x * y * h[r * dim + c];
                }
            }
            worst = worst.max((hf.get(a, b) + s).norm());
        }
    }
    worst
}
