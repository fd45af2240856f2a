//! Exact `N`-body dynamics on a one-dimensional periodic grid.
//!
//! The state `Ψ(x₁,…,x_N)` is stored as an `M^N` row-major tensor and evolved
//! by `i∂tΨ = (−Σ_jΔ_j + N⁻¹Σ_{i<j} v_N(x_i−x_j))Ψ` with Strang splitting.

mod pickl;

pub use pickl::{
    calibrate_cv, delta_lambda, excitation_weights, infimum_delta, pickl_alpha, pickl_bound, rate_fit,
    weight_m, PicklAlpha, PicklTrace, RateFit, RateFitInput,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianEigen};
use crate::potential::ScaledPotential;
use crate::runner::config::DEFAULT_MEMORY_CAP;
use crate::spectral::{free_phase_table, multiply_separable, transform_all, Field, Grid, Kernel};
use crate::C64;

/// Bytes needed for an `M^N` complex tensor, if it fits in `u64`.
pub fn state_bytes(m: usize, n: usize) -> Option<u64> {
    (m as u64).checked_pow(n as u32)?.checked_mul(16)
}

fn check_memory(m: usize, n: usize, cap: u64) -> Result<()> {
    match state_bytes(m, n) {
        Some(b) if b <= cap => Ok(()),
        b => Err(Error::Guard(format!(
            "memory guard: a state with M={m}, N={n} needs {} bytes (16·M^N), cap is {cap}",
            b.map_or("more than 2^64".into(), |b| b.to_string())
        ))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyState {
    grid: Grid,
    n: usize,
    values: Vec<C64>,
}

impl ManyBodyState {
    pub fn new(grid: Grid, n: usize, values: Vec<C64>) -> Result<Self> {
        grid.ensure_line()?;
        if !(2..=5).contains(&n) {
            return Err(Error::InvalidParameter(format!("N must lie in [2,5], got {n}")));
        }
        if values.len() != grid.points().pow(n as u32) {
            return Err(Error::GridMismatch(format!(
                "expected M^N = {} entries, got {}",
                grid.points().pow(n as u32),
                values.len()
            )));
        }
        Ok(ManyBodyState { grid, n, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// `‖Ψ‖_{L²}` with weight `dx^N`.
    pub fn norm(&self) -> f64 {
        let w = self.grid.spacing().powi(self.n as i32);
        (self.values.par_iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.par_iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest deviation under a swap of adjacent coordinates.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.grid.points();
        let n = self.n;
        (0..n - 1)
            .map(|a| {
                let sa = m.pow((n - 1 - a) as u32);
                let sb = sa / m;
                self.values
                    .par_iter()
                    .enumerate()
                    .map(|(idx, &v)| {
                        let ia = (idx / sa) % m;
                        let ib = (idx / sb) % m;
                        let swapped = idx - ia * sa - ib * sb + ib * sa + ia * sb;
                        (v - self.values[swapped]).norm()
                    })
                    .reduce(|| 0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `⟨self, other⟩` with weight `dx^N`.
    pub fn inner(&self, other: &ManyBodyState) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let w = self.grid.spacing().powi(self.n as i32);
        let s: C64 = self
            .values
            .par_iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * w)
    }

    pub fn l2_distance(&self, other: &ManyBodyState) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let w = self.grid.spacing().powi(self.n as i32);
        let s: f64 = self
            .values
            .par_iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * w).sqrt())
    }
}

/// `Ψ = φ^{⊗N}`; `φ` must be normalized.
pub fn factorized_state(phi: &Field, n: usize) -> Result<ManyBodyState> {
    factorized_state_capped(phi, n, DEFAULT_MEMORY_CAP)
}

pub fn factorized_state_capped(phi: &Field, n: usize, cap: u64) -> Result<ManyBodyState> {
    let grid = *phi.grid();
    grid.ensure_line()?;
    if (phi.l2() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "factorized data needs ‖φ‖ = 1, got {}",
            phi.l2()
        )));
    }
    if !(2..=5).contains(&n) {
        return Err(Error::InvalidParameter(format!("N must lie in [2,5], got {n}")));
    }
    let m = grid.points();
    check_memory(m, n, cap)?;
    let f = phi.values();
    let len = m.pow(n as u32);
    let mut values = vec![C64::new(0.0, 0.0); len];
    values.par_chunks_mut(m).enumerate().for_each(|(row, chunk)| {
        // Product over the leading N−1 coordinates, then the last one.
        let mut prefix = C64::new(1.0, 0.0);
        let mut r = row;
        let mut factors = [C64::new(1.0, 0.0); 5];
        for a in (0..n - 1).rev() {
            factors[a] = f[r % m];
            r /= m;
        }
        for fa in factors.iter().take(n - 1) {
            prefix *= fa;
        }
        for (c, out) in chunk.iter_mut().enumerate() {
            *out = prefix * f[c];
        }
    });
    Ok(ManyBodyState { grid, n, values })
}

/// Precomputed Strang propagator for a fixed `(v_N, N, dt)`.
#[derive(Clone, Debug)]
pub struct MbPropagator {
    grid: Grid,
    n: usize,
    dt: f64,
    half_kinetic: Vec<C64>,
    full_kinetic: Vec<C64>,
    /// `e^{−i dt v_N(d dx)/N}` indexed by `(d + M/2) mod M`.
    pair_phase: Vec<C64>,
    free: bool,
}

impl MbPropagator {
    pub fn new(v: &ScaledPotential, n: usize, dt: f64) -> Result<Self> {
        Self::with_cap(v, n, dt, DEFAULT_MEMORY_CAP)
    }

    pub fn with_cap(v: &ScaledPotential, n: usize, dt: f64, cap: u64) -> Result<Self> {
        let grid = *v.grid();
        grid.ensure_line()?;
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("time step must be finite and nonzero, got {dt}")));
        }
        check_memory(grid.points(), n, cap)?;
        let nf = n as f64;
        let pair_phase = v
            .samples()
            .values()
            .iter()
            .map(|s| C64::from_polar(1.0, -dt * s.re / nf))
            .collect();
        Ok(MbPropagator {
            grid,
            n,
            dt,
            half_kinetic: free_phase_table(&grid, 0.5 * dt),
            full_kinetic: free_phase_table(&grid, dt),
            pair_phase,
            free: v.is_zero(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn kinetic(&self, psi: &mut [C64], table: &[C64]) {
        let m = self.grid.points();
        transform_all(psi, m, self.n, false);
        multiply_separable(psi, m, self.n, table);
        transform_all(psi, m, self.n, true);
    }

    fn potential(&self, psi: &mut [C64]) {
        let m = self.grid.points();
        let n = self.n;
        let ph = &self.pair_phase;
        let off = |i: usize, j: usize| ph[(i + m + m / 2 - j) % m];
        psi.par_chunks_mut(m).enumerate().for_each(|(row, chunk)| {
            let mut idx = [0usize; 5];
            let mut r = row;
            for a in (0..n - 1).rev() {
                idx[a] = r % m;
                r /= m;
            }
            let mut outer = C64::new(1.0, 0.0);
            for a in 0..n - 1 {
                for b in a + 1..n - 1 {
                    outer *= off(idx[a], idx[b]);
                }
            }
            for (c, v) in chunk.iter_mut().enumerate() {
                let mut f = outer;
                for &ia in idx.iter().take(n - 1) {
                    f *= off(ia, c);
                }
                *v *= f;
            }
        });
    }

    /// Advance `steps` Strang steps in place, fusing adjacent half kinetics.
    pub fn evolve_in_place(&self, psi: &mut ManyBodyState, steps: usize) -> Result<()> {
        if psi.n != self.n || psi.grid != self.grid {
            return Err(Error::GridMismatch("state does not match propagator".into()));
        }
        if steps == 0 {
            return Ok(());
        }
        if self.free {
            let table = free_phase_table(&self.grid, self.dt * steps as f64);
            self.kinetic(&mut psi.values, &table);
            return Ok(());
        }
        self.kinetic(&mut psi.values, &self.half_kinetic);
        for s in 0..steps {
            self.potential(&mut psi.values);
            let table = if s + 1 == steps { &self.half_kinetic } else { &self.full_kinetic };
            self.kinetic(&mut psi.values, table);
        }
        if !psi.is_finite() {
            return Err(Error::Numerical("many-body state became non-finite".into()));
        }
        Ok(())
    }

    /// `⟨Ψ, hΨ⟩` for `h = −ΣΔ + N⁻¹Σ_{i<j}v_N`.
    pub fn energy(&self, psi: &ManyBodyState, v: &ScaledPotential) -> f64 {
        many_body_energy(psi, v)
    }
}

/// One Strang step (allocates a new state).
pub fn mb_step(psi: &ManyBodyState, v: &ScaledPotential, dt: f64) -> Result<ManyBodyState> {
    let prop = MbPropagator::new(v, psi.n, dt)?;
    let mut out = psi.clone();
    prop.evolve_in_place(&mut out, 1)?;
    Ok(out)
}

/// `⟨Ψ, hΨ⟩`, kinetic part spectrally.
pub fn many_body_energy(psi: &ManyBodyState, v: &ScaledPotential) -> f64 {
    let g = psi.grid;
    let m = g.points();
    let n = psi.n;
    let w = g.spacing().powi(n as i32);
    let mut hat = psi.values.clone();
    transform_all(&mut hat, m, n, false);
    let k2: Vec<f64> = g.wavenumbers().iter().map(|k| k * k).collect();
    // Parseval for the raw DFT: Σ|f|² = M^{-N} Σ|F|².
    let norm = 1.0 / (m as f64).powi(n as i32);
    let kinetic: f64 = hat
        .par_chunks(m)
        .enumerate()
        .map(|(row, chunk)| {
            let mut r = row;
            let mut outer = 0.0;
            for _ in 0..n - 1 {
                outer += k2[r % m];
                r /= m;
            }
            chunk
                .iter()
                .enumerate()
                .map(|(c, z)| (outer + k2[c]) * z.norm_sqr())
                .sum::<f64>()
        })
        .sum::<f64>()
        * norm
        * w;
    let nf = n as f64;
    let pot: f64 = psi
        .values
        .par_chunks(m)
        .enumerate()
        .map(|(row, chunk)| {
            let mut idx = [0usize; 5];
            let mut r = row;
            for a in (0..n - 1).rev() {
                idx[a] = r % m;
                r /= m;
            }
            let mut outer = 0.0;
            for a in 0..n - 1 {
                for b in a + 1..n - 1 {
                    outer += v.at_offset(idx[a], idx[b]);
                }
            }
            chunk
                .iter()
                .enumerate()
                .map(|(c, z)| {
                    let inner: f64 = idx.iter().take(n - 1).map(|&ia| v.at_offset(ia, c)).sum();
                    (outer + inner) * z.norm_sqr()
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        * w
        / nf;
    kinetic + pot
}

/// One-particle reduced density `γ(x,x') = ∫Ψ(x,·)Ψ̄(x',·)`.
#[derive(Clone, Debug)]
pub struct Marginal {
    kernel: Kernel,
}

impl Marginal {
    pub fn from_kernel(kernel: Kernel) -> Self {
        Marginal { kernel }
    }

    /// `|φ⟩⟨φ|`.
    pub fn pure(phi: &Field) -> Result<Self> {
        Ok(Marginal { kernel: Kernel::outer(phi, &phi.conj(), C64::new(1.0, 0.0))? })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn trace(&self) -> f64 {
        self.kernel.diagonal().iter().map(|z| z.re).sum::<f64>() * self.kernel.grid().spacing()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.kernel.hermiticity_defect()
    }

    /// Eigenvalues of the operator (occupation numbers).
    pub fn eigen(&self) -> Result<HermitianEigen> {
        eigh(&self.kernel.operator_matrix(), self.kernel.points())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.min())
    }
}

pub fn marginal(psi: &ManyBodyState) -> Marginal {
    let g = psi.grid;
    let m = g.points();
    let rest = psi.values.len() / m;
    let w = g.spacing().powi(psi.n as i32 - 1);
    let rows: Vec<&[C64]> = psi.values.chunks(rest).collect();
    let mut out = vec![C64::new(0.0, 0.0); m * m];
    out.par_chunks_mut(m).enumerate().for_each(|(x, orow)| {
        for (xp, o) in orow.iter_mut().enumerate() {
            let s: C64 = rows[x].iter().zip(rows[xp]).map(|(a, b)| a * b.conj()).sum();
            *o = s * w;
        }
    });
    Marginal { kernel: Kernel::from_raw(g, out) }
}

/// `Tr|γ − |φ⟩⟨φ||`, via the eigenvalues of the difference operator.
pub fn trace_distance(gamma: &Marginal, phi: &Field) -> Result<f64> {
    let pure = Marginal::pure(phi)?;
    let diff = gamma.kernel.sub(&pure.kernel)?;
    Ok(eigh(&diff.operator_matrix(), diff.points())?.abs_sum())
}

/// Operator norm of `γ − |φ⟩⟨φ|`.
pub fn operator_distance(gamma: &Marginal, phi: &Field) -> Result<f64> {
    let pure = Marginal::pure(phi)?;
    let diff = gamma.kernel.sub(&pure.kernel)?;
    Ok(eigh(&diff.operator_matrix(), diff.points())?.max_abs())
}

/// Dense `h` on the tensor grid (row-major `M^N × M^N`), for small reference
/// calculations only.
pub fn dense_hamiltonian(grid: &Grid, n: usize, v: &ScaledPotential) -> Result<Vec<C64>> {
    let m = grid.points();
    let dim = m.pow(n as u32);
    if dim > 4096 {
        return Err(Error::Guard(format!("dense Hamiltonian of size {dim} refused (limit 4096)")));
    }
    let lap = crate::spectral::laplacian_matrix(grid)?;
    let mut h = vec![C64::new(0.0, 0.0); dim * dim];
    let digits = |mut i: usize| {
        let mut d = [0usize; 5];
        for a in (0..n).rev() {
            d[a] = i % m;
            i /= m;
        }
        d
    };
    for row in 0..dim {
        let dr = digits(row);
        let mut pot = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                pot += v.at_offset(dr[a], dr[b]);
            }
        }
        h[row * dim + row] += pot / n as f64;
        for a in 0..n {
            let stride = m.pow((n - 1 - a) as u32);
            for j in 0..m {
                let col = row - dr[a] * stride + j * stride;
                h[row * dim + col] -= lap[dr[a] * m + j];
            }
        }
    }
    Ok(h)
}
