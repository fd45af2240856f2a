//! Exact Fock dynamics against the second-order ansatz, swept over `N`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{approx_state, coherent_state, evolve_exact, fock_distance, fock_hamiltonian, FockBasis};
use crate::pairexc::{pair_step, PairState};
use crate::potential::{Profile, ScaledPotential};
use crate::runner::fit::{loglog_fit, LogLogFit};
use crate::spectral::Field;

#[derive(Clone, Debug)]
pub struct FockScalingInput {
    pub profile: Profile,
    pub beta: f64,
    /// Initial orbital on the line grid whose sites are the modes.
    pub phi0: Field,
    pub n_max: usize,
    pub leakage_threshold: f64,
    pub n_list: Vec<usize>,
    /// Sample times, each a multiple of `dt`.
    pub times: Vec<f64>,
    /// Step of the co-evolved `(φ, s₂, p₂)` system.
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockPoint {
    #[serde(rename = "N")]
    pub n: usize,
    pub dim_fock: usize,
    /// Largest top-shell weight met by either state.
    pub leakage: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub ill_conditioned: bool,
}

impl FockPoint {
    pub fn final_distance(&self) -> f64 {
        *self.distances.last().unwrap_or(&f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockScaling {
    pub points: Vec<FockPoint>,
    /// Log-log slope of the final-time distance against `N`.
    pub slope: Option<LogLogFit>,
}

fn run_one(input: &FockScalingInput, n: usize) -> Result<FockPoint> {
    let grid = *input.phi0.grid();
    let basis = Arc::new(FockBasis::new(grid.points(), input.n_max)?.with_leakage_threshold(input.leakage_threshold));
    let v = ScaledPotential::sample_lattice(input.profile, n, input.beta, grid)?;
    let h = fock_hamiltonian(&basis, &v, n)?;

    let mut exact = coherent_state(basis.clone(), &input.phi0, n)?;
    let mut leakage = exact.leakage();
    let mut pair = PairState::new(input.phi0.clone(), v)?;
    let mut ill = false;
    let mut t_prev = 0.0;
    let mut distances = Vec::with_capacity(input.times.len());
    for &t in &input.times {
        let steps = ((t - t_prev) / input.dt).round();
        if steps < 0.0 || ((t - t_prev) - steps * input.dt).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "sample times must increase in multiples of dt={}, got {t}",
                input.dt
            )));
        }
        exact = evolve_exact(&exact, &h, t - t_prev)?;
        for _ in 0..steps as usize {
            pair = pair_step(&pair, input.dt)?;
        }
        let (approx, flag) = approx_state(basis.clone(), &pair.phi, &pair.s2, &pair.p2, n)?;
        ill |= flag;
        leakage = leakage.max(exact.leakage()).max(approx.leakage());
        distances.push(fock_distance(&exact, &approx));
        t_prev = t;
    }
    if leakage > input.leakage_threshold {
        return Err(Error::Leakage { leakage, threshold: input.leakage_threshold });
    }
    Ok(FockPoint { n, dim_fock: basis.dim(), leakage, times: input.times.clone(), distances, ill_conditioned: ill })
}

/// Co-evolve `ψ_exact = e^{itH}ψ(φ₀)` and the ansatz built from the
/// Hartree orbital and the pair kernels, for each `N`, and fit the final-time
/// phase-optimized distance against `N`.
pub fn fock_error_scaling(input: &FockScalingInput) -> Result<FockScaling> {
    if input.n_list.is_empty() {
        return Err(Error::InvalidParameter("empty sweep axis".into()));
    }
    if input.times.is_empty() {
        return Err(Error::InvalidParameter("no sample times".into()));
    }
    let points: Vec<FockPoint> = input
        .n_list
        .par_iter()
        .map(|&n| run_one(input, n).map_err(|e| e.labeled(format!("N={n}"))))
        .collect::<Result<_>>()?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.final_distance() > 1e-12)
        .map(|p| (p.n as f64, p.final_distance()))
        .collect();
    let slope = if usable.len() == points.len() && usable.len() >= 2 { Some(loglog_fit(&usable)?) } else { None };
    Ok(FockScaling { points, slope })
}
