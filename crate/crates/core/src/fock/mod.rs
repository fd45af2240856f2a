//! Truncated bosonic Fock space over a small line grid.
//!
//! Each grid site is one mode, with the dictionary `a_j ≈ √dx·a_{x_j}` so that
//! the canonical commutation relations hold exactly away from the cutoff
//! shell. Exponentials of the (skew-)Hermitian generators are applied with
//! adaptive Lanczos propagation; every application reports the weight left in
//! the top particle shell.

mod basis;
mod ops;
mod scaling;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, Csr, DEFAULT_KRYLOV_TOL};
use crate::manybody::Marginal;
use crate::pairexc::half_angle;
use crate::spectral::{Field, Kernel};
use crate::C64;

pub use basis::{fock_dimension, FockBasis, MAX_CUTOFF, MAX_MODES};
pub use ops::{build_ops, fock_hamiltonian, number_operator, LadderOps};
pub use scaling::{fock_error_scaling, FockPoint, FockScaling, FockScalingInput};

/// Norm drift tolerated by any exponential before it counts as a failure.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct FockState {
    basis: Arc<FockBasis>,
    coeffs: Vec<C64>,
}

impl FockState {
    /// The vacuum `Ω = (1, 0, 0, …)`.
    pub fn vacuum(basis: Arc<FockBasis>) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
        coeffs[0] = C64::new(1.0, 0.0);
        FockState { basis, coeffs }
    }

    pub fn from_coeffs(basis: Arc<FockBasis>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a basis of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        if coeffs.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numerical("non-finite Fock coefficient".into()));
        }
        Ok(FockState { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FockState) -> C64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    /// Weight `Σ |c|²` in each particle sector.
    pub fn shell_weights(&self) -> Vec<f64> {
        (0..=self.basis.n_max())
            .map(|n| self.coeffs[self.basis.shell(n)].iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Weight in the top shell `n = n_max`.
    pub fn leakage(&self) -> f64 {
        *self.shell_weights().last().unwrap()
    }

    /// `⟨ψ, N̂ψ⟩`.
    pub fn number_expectation(&self) -> f64 {
        self.shell_weights().iter().enumerate().map(|(n, w)| n as f64 * w).sum()
    }

    pub fn expectation(&self, op: &Csr) -> C64 {
        self.inner(&FockState { basis: self.basis.clone(), coeffs: op.matvec(&self.coeffs) })
    }

    fn check_leakage(self) -> Result<Self> {
        let leakage = self.leakage();
        let threshold = self.basis.leakage_threshold();
        if leakage > threshold {
            return Err(Error::Leakage { leakage, threshold });
        }
        Ok(self)
    }
}

/// `e^{-iY} ψ` for Hermitian `Y`, checking norm preservation.
fn propagate(psi: &FockState, y: &Csr, t: f64) -> Result<FockState> {
    let (out, _) = expm_hermitian(|x, o| y.matvec_into(x, o), &psi.coeffs, t, DEFAULT_KRYLOV_TOL)?;
    let out = FockState::from_coeffs(psi.basis.clone(), out)?;
    let drift = (out.norm() - psi.norm()).abs();
    if drift > NORM_TOL {
        return Err(Error::Numerical(format!("Fock propagation changed the norm by {drift:e}")));
    }
    Ok(out)
}

fn ensure_modes(basis: &FockBasis, m: usize) -> Result<()> {
    if basis.modes() != m {
        return Err(Error::GridMismatch(format!("grid has {m} sites, basis has {} modes", basis.modes())));
    }
    Ok(())
}

/// Hermitian `Y` with `e^{-s A(φ)} = e^{-iY}`, where
/// `−s A(φ) = s Σ_j (α_j a†_j − ᾱ_j a_j)` and `α_j = φ(x_j)√dx`.
pub fn weyl_generator(basis: &FockBasis, phi: &Field, s: f64) -> Result<Csr> {
    phi.grid().ensure_line()?;
    ensure_modes(basis, phi.grid().points())?;
    let sq = phi.grid().spacing().sqrt();
    let i = C64::new(0.0, 1.0);
    let mut trip = Vec::new();
    for st in 0..basis.dim() {
        for (j, f) in phi.values().iter().enumerate() {
            let alpha = f * sq;
            if let Some((t, a)) = basis.create(st, j) {
                trip.push((t, st, i * s * alpha * a));
            }
            if let Some((t, a)) = basis.annihilate(st, j) {
                trip.push((t, st, -i * s * alpha.conj() * a));
            }
        }
    }
    Ok(Csr::from_triplets(basis.dim(), basis.dim(), trip))
}

/// `e^{-s A(φ)} ψ` with `A(φ) = a(φ̄) − a†(φ)`; `s = √N` builds the coherent
/// state from the vacuum.
pub fn weyl_displace(psi: &FockState, phi: &Field, s: f64) -> Result<FockState> {
    if s == 0.0 || phi.values().iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(psi.clone());
    }
    let y = weyl_generator(&psi.basis, phi, s)?;
    propagate(psi, &y, 1.0)?.check_leakage()
}

/// The coherent state `ψ(φ) = e^{-√N A(φ)} Ω`.
pub fn coherent_state(basis: Arc<FockBasis>, phi: &Field, n: usize) -> Result<FockState> {
    weyl_displace(&FockState::vacuum(basis), phi, (n as f64).sqrt())
}

/// Hermitian `Y` with `e^{-s B(k)} = e^{-iY}`, where
/// `B(k) = ½ Σ_{jk} (K̄_{jk} a_j a_k − K_{jk} a†_j a†_k)` and `K = k·dx`.
pub fn bogoliubov_generator(basis: &FockBasis, k: &Kernel, s: f64) -> Result<Csr> {
    k.grid().ensure_line()?;
    let m = k.points();
    ensure_modes(basis, m)?;
    let dx = k.grid().spacing();
    let mut trip = Vec::new();
    for st in 0..basis.dim() {
        for a in 0..m {
            for b in 0..m {
                let kab = k.values()[a * m + b] * dx;
                if kab == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((t, amp)) = basis.annihilate_pair(st, a, b) {
                    trip.push((t, st, kab.conj() * amp));
                }
            }
        }
    }
    let tmat = Csr::from_triplets(basis.dim(), basis.dim(), trip);
    Ok(tmat.sub(&tmat.adjoint()).scaled(C64::new(0.0, -0.5 * s)))
}

/// `e^{-s B(k)} ψ`; `s = 1` gives the pair-excitation factor of the ansatz.
pub fn bogoliubov_apply(psi: &FockState, k: &Kernel, s: f64) -> Result<FockState> {
    if s == 0.0 || k.max_abs() == 0.0 {
        return Ok(psi.clone());
    }
    let y = bogoliubov_generator(&psi.basis, k, s)?;
    propagate(psi, &y, 1.0)?.check_leakage()
}

/// `e^{itH} ψ₀`, the solution of `(1/i)∂ₜψ = Hψ`.
pub fn evolve_exact(psi0: &FockState, h: &Csr, t: f64) -> Result<FockState> {
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    propagate(psi0, h, -t)
}

/// `e^{-√N A(φ)} e^{-B(k)} Ω` with `k` recovered from `(s₂, p₂)`; the phase
/// `e^{iNχ}` is left out and absorbed by [`fock_distance`].
///
/// Returns the state and whether the half-angle recovery was ill-conditioned.
pub fn approx_state(
    basis: Arc<FockBasis>,
    phi: &Field,
    s2: &Kernel,
    p2: &Kernel,
    n: usize,
) -> Result<(FockState, bool)> {
    let ha = half_angle(s2, p2)?;
    let pair = bogoliubov_apply(&FockState::vacuum(basis), &ha.k, 1.0)?;
    Ok((weyl_displace(&pair, phi, (n as f64).sqrt())?, ha.ill_conditioned))
}

/// `min_θ ‖a − e^{iθ} b‖ = √(‖a‖² + ‖b‖² − 2|⟨a, b⟩|)`.
pub fn fock_distance(a: &FockState, b: &FockState) -> f64 {
    let v = a.norm().powi(2) + b.norm().powi(2) - 2.0 * a.inner(b).norm();
    v.max(0.0).sqrt()
}

/// One-particle Fock marginal: kernel `⟨a†_y a_x⟩ / (dx ⟨N̂⟩)` on the sites,
/// so that its operator matrix has unit trace.
pub fn fock_marginal(psi: &FockState, grid: crate::spectral::Grid) -> Result<Marginal> {
    grid.ensure_line()?;
    let basis = &psi.basis;
    let m = basis.modes();
    ensure_modes(basis, grid.points())?;
    let nexp = psi.number_expectation();
    if nexp <= 1e-300 {
        return Err(Error::InvalidParameter("Fock marginal of the vacuum is undefined".into()));
    }
    let c = &psi.coeffs;
    let mut k = vec![C64::new(0.0, 0.0); m * m];
    for st in 0..basis.dim() {
        if c[st] == C64::new(0.0, 0.0) {
            continue;
        }
        for x in 0..m {
            for y in 0..m {
                // ⟨a†_y a_x⟩ = Σ conj(c[t]) amp c[st] with a†_y a_x |st⟩ = amp |t⟩.
                if let Some((t, amp)) = basis.hop(st, y, x) {
                    k[x * m + y] += c[t].conj() * amp * c[st];
                }
            }
        }
    }
    let scale = 1.0 / (grid.spacing() * nexp);
    Ok(Marginal::from_kernel(Kernel::from_raw(grid, k.into_iter().map(|z| z * scale).collect())))
}
