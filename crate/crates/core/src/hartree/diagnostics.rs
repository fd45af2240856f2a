use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hartree::{evolve, Interaction, Trajectory};
use crate::potential::{Profile, ScaledPotential};
use crate::runner::fit::loglog_fit;
use crate::spectral::Field;

/// Fraction of spectral mass used to define the fastest relevant group velocity.
pub const HORIZON_MASS_FRACTION: f64 = 0.99;

/// Time before which free-space dispersion is not yet polluted by the
/// periodic images: `L / (4 v_max)` with `v_max = 2 ξ₉₉`, the group velocity
/// at the radius holding 99% of the spectral mass.
pub fn wraparound_horizon(phi0: &Field) -> f64 {
    let xi = phi0.forward().mass_radius(HORIZON_MASS_FRACTION);
    let vmax = 2.0 * xi;
    if vmax == 0.0 {
        f64::INFINITY
    } else {
        phi0.grid().length() / (4.0 * vmax)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub residual: f64,
    pub samples: usize,
}

pub const MIN_DECAY_SAMPLES: usize = 8;

/// Least-squares slope of `log‖φ(t)‖_∞` against `log t` inside `window`.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64), horizon: Option<f64>) -> Result<DecayFit> {
    let (a, b) = window;
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!(
            "decay window must satisfy 0 < start < end, got [{a}, {b}]"
        )));
    }
    if let Some(h) = horizon {
        if b > h {
            return Err(Error::Guard(format!(
                "decay window end {b} exceeds the wrap-around horizon {h:.3}"
            )));
        }
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= a - 1e-12 && t <= b + 1e-12)
        .collect();
    if pts.len() < MIN_DECAY_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least {MIN_DECAY_SAMPLES} samples in the window, got {}",
            pts.len()
        )));
    }
    let fit = loglog_fit(&pts)?;
    Ok(DecayFit {
        exponent: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        samples: pts.len(),
    })
}

/// `2/q + d/r = d/2` with `q, r ≥ 2`, excluding the forbidden endpoint in 2D.
pub fn is_admissible(q: f64, r: f64, dim: usize) -> bool {
    if q < 2.0 || r < 2.0 || q.is_nan() || r.is_nan() {
        return false;
    }
    let d = dim as f64;
    if dim == 2 && q == 2.0 && r.is_infinite() {
        return false;
    }
    let lhs = if q.is_infinite() { 0.0 } else { 2.0 / q } + if r.is_infinite() { 0.0 } else { d / r };
    (lhs - d / 2.0).abs() < 1e-12
}

/// `(∫_window ‖φ(t)‖_{L^r}^q dt)^{1/q}` by the trapezoid rule on the recorded
/// samples (`q = ∞` gives the sup over the window).
pub fn strichartz_window_norm(run: &Trajectory, q: f64, r: f64, window: (f64, f64)) -> Result<f64> {
    let dim = run.final_state.grid().dim();
    if !is_admissible(q, r, dim) {
        return Err(Error::InvalidParameter(format!(
            "(q, r) = ({q}, {r}) is not admissible in dimension {dim}"
        )));
    }
    let norms = run.lr_series(r).ok_or_else(|| {
        Error::InvalidParameter(format!("L^{r} norms were not recorded for this run"))
    })?;
    let pts: Vec<(f64, f64)> = run
        .times()
        .into_iter()
        .zip(norms)
        .filter(|&(t, _)| t >= window.0 - 1e-12 && t <= window.1 + 1e-12)
        .collect();
    if pts.is_empty() {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(pts.iter().map(|p| p.1).fold(0.0, f64::max));
    }
    let integral: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.powf(q) + w[1].1.powf(q)))
        .sum();
    Ok(integral.powf(1.0 / q))
}

/// Evolve Hartree with `v_N` and the contact NLS with `g = ∫v` from the same
/// datum and report `‖φ_N(t) − φ_nls(t)‖_{L²}` for each `N`.
pub fn hartree_to_nls_distance(
    phi0: &Field,
    profile: &Profile,
    beta: f64,
    n_list: &[usize],
    t: f64,
    dt: f64,
) -> Result<Vec<(usize, f64)>> {
    let grid = *phi0.grid();
    let steps = (t / dt).round() as usize;
    let g = profile.coupling_constant(grid.dim());
    let nls = evolve(phi0, &Interaction::Contact(g), dt, steps)?;
    n_list
        .iter()
        .map(|&n| {
            let v = ScaledPotential::sample_scaled(*profile, n, beta, grid)?;
            let phi = evolve(phi0, &Interaction::Potential(v), dt, steps)?;
            Ok((n, phi.l2_distance(&nls)?))
        })
        .collect()
}
