//! Pickl's counting functional and the mean-field rate pipeline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hartree::{self, Interaction};
use crate::manybody::{factorized_state_capped, marginal, trace_distance, ManyBodyState, MbPropagator};
use crate::potential::{Profile, ScaledPotential};
use crate::runner::fit::{loglog_fit, LogLogFit};
use crate::spectral::{Field, Grid};
use crate::C64;

/// `m^λ(k) = k/N^λ` for `k ≤ N^λ`, and `1` beyond.
pub fn weight_m(k: usize, n: usize, lambda: f64) -> f64 {
    let cut = (n as f64).powf(lambda);
    let k = k as f64;
    if k <= cut {
        k / cut
    } else {
        1.0
    }
}

/// Apply `x ↦ x − u (2 u*x / u*u)` along one axis of the tensor.
fn householder_along(data: &mut [C64], m: usize, naxes: usize, axis: usize, u: &[C64]) {
    let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    if uu == 0.0 {
        return;
    }
    let stride = m.pow((naxes - 1 - axis) as u32);
    let block = m * stride;
    data.par_chunks_mut(block).for_each(|blk| {
        for inner in 0..stride {
            let mut proj = C64::new(0.0, 0.0);
            for j in 0..m {
                proj += u[j].conj() * blk[j * stride + inner];
            }
            let f = proj * (2.0 / uu);
            for j in 0..m {
                blk[j * stride + inner] -= u[j] * f;
            }
        }
    });
}

/// `w_k = ⟨Ψ, P_k Ψ⟩`, the probability of exactly `k` particles outside `φ`,
/// and `‖q₁Ψ‖²`.
///
/// A Householder reflection on every coordinate maps `φ` to the first basis
/// vector, after which `P_k` is diagonal: it selects multi-indices with
/// exactly `k` nonzero entries.
pub fn excitation_weights(psi: &ManyBodyState, phi: &Field) -> Result<(Vec<f64>, f64)> {
    psi.grid().ensure_same(phi.grid())?;
    let m = psi.grid().points();
    let n = psi.n();
    let dx = psi.grid().spacing();
    let mut unit: Vec<C64> = phi.values().iter().map(|z| z * dx.sqrt()).collect();
    let nrm = unit.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return Err(Error::InvalidParameter("reference orbital is zero".into()));
    }
    unit.iter_mut().for_each(|z| *z /= nrm);
    let phase = if unit[0].norm() > 0.0 { unit[0] / unit[0].norm() } else { C64::new(1.0, 0.0) };
    let mut u = unit;
    u[0] += phase;

    let mut t: Vec<C64> = psi.values().to_vec();
    for axis in 0..n {
        householder_along(&mut t, m, n, axis, &u);
    }
    let w = dx.powi(n as i32);
    // Entries at the reflection's round-off floor are exact zeros in exact
    // arithmetic (e.g. every excited entry of φ^{⊗N}); flush them.
    let peak = t.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let floor = (8.0 * f64::EPSILON).powi(2) * peak;
    let top_stride = m.pow(n as u32 - 1);
    let (weights, q1) = t
        .par_iter()
        .enumerate()
        .fold(
            || (vec![0.0; n + 1], 0.0),
            |(mut acc, mut q1), (idx, z)| {
                let mut r = idx;
                let mut k = 0;
                for _ in 0..n {
                    if r % m != 0 {
                        k += 1;
                    }
                    r /= m;
                }
                let a = z.norm_sqr();
                let p = if a <= floor { 0.0 } else { a * w };
                acc[k] += p;
                if idx / top_stride != 0 {
                    q1 += p;
                }
                (acc, q1)
            },
        )
        .reduce(
            || (vec![0.0; n + 1], 0.0),
            |(mut a, qa), (b, qb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, qa + qb)
            },
        );
    Ok((weights, q1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicklAlpha {
    /// `α_N = ‖q₁Ψ‖²`.
    pub alpha: f64,
    /// `α_N^λ = Σ_k m^λ(k) w_k`.
    pub alpha_lambda: f64,
    pub weights: Vec<f64>,
}

pub fn pickl_alpha(psi: &ManyBodyState, phi: &Field, lambda: f64) -> Result<PicklAlpha> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0,1], got {lambda}")));
    }
    let (weights, alpha) = excitation_weights(psi, phi)?;
    let n = psi.n();
    let alpha_lambda = weights.iter().enumerate().map(|(k, w)| weight_m(k, n, lambda) * w).sum();
    Ok(PicklAlpha { alpha, alpha_lambda, weights })
}

/// `δ_λ = ½ max{1 − λ − 4β, 3β − λ, −1 + λ + 3β}`.
pub fn delta_lambda(beta: f64, lambda: f64) -> f64 {
    0.5 * (1.0 - lambda - 4.0 * beta)
        .max(3.0 * beta - lambda)
        .max(-1.0 + lambda + 3.0 * beta)
}

/// Minimize `δ_λ` over `λ ∈ (0, 1]`: a fine grid plus the kinks of the max
/// (`λ = 1 − 7β/2` and `λ = 1/2`). Returns `(λ*, δ*)`.
pub fn infimum_delta(beta: f64) -> (f64, f64) {
    let mut cands: Vec<f64> = (1..=10_000).map(|i| i as f64 / 10_000.0).collect();
    cands.push(0.5);
    cands.push(1.0 - 3.5 * beta);
    cands
        .into_iter()
        .filter(|&l| l > 0.0 && l <= 1.0)
        .map(|l| (l, delta_lambda(beta, l)))
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

/// Condensate quantities along `[0, t]` needed by the bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PicklTrace {
    pub times: Vec<f64>,
    pub linf: Vec<f64>,
    pub lap_density: Vec<f64>,
}

impl PicklTrace {
    pub fn push(&mut self, t: f64, phi: &Field) {
        self.times.push(t);
        self.linf.push(phi.linf());
        self.lap_density.push(hartree::laplacian_density_norm(phi));
    }

    /// `∫₀^t ‖φ_s‖_∞² ds` by the trapezoid rule.
    pub fn linf_sq_integral(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.linf.windows(2))
            .map(|(t, l)| 0.5 * (t[1] - t[0]) * (l[0] * l[0] + l[1] * l[1]))
            .sum()
    }

    /// `sup_s K^{φ_s} / C_v = sup (‖Δ|φ|²‖ + ‖φ‖_∞ + 1)‖φ‖_∞`.
    pub fn sup_k(&self) -> f64 {
        self.linf
            .iter()
            .zip(&self.lap_density)
            .map(|(l, d)| (d + l + 1.0) * l)
            .fold(0.0, f64::max)
    }
}

/// `e^{C∫‖φ‖²_∞} α₀ + (e^{C∫‖φ‖²_∞} − 1) sup K^φ N^{δ_λ}` at the end of the trace.
pub fn pickl_bound(trace: &PicklTrace, c_v: f64, alpha0: f64, n: usize, beta: f64, lambda: f64) -> f64 {
    let growth = (c_v * trace.linf_sq_integral()).exp();
    let k = c_v * trace.sup_k();
    growth * alpha0 + (growth - 1.0) * k * (n as f64).powf(delta_lambda(beta, lambda))
}

/// Smallest `C_v` (by bisection) for which the bound reaches `target`.
pub fn calibrate_cv(trace: &PicklTrace, alpha0: f64, target: f64, n: usize, beta: f64, lambda: f64) -> Result<f64> {
    let f = |c: f64| pickl_bound(trace, c, alpha0, n, beta, lambda);
    if f(0.0) >= target {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical("could not calibrate C_v: bound saturates".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug)]
pub struct RateFitInput {
    pub grid: Grid,
    pub profile: Profile,
    pub beta: f64,
    pub lambda: f64,
    pub n_list: Vec<usize>,
    pub t: f64,
    pub dt: f64,
    pub phi0: Field,
    pub memory_cap: u64,
    /// Fixed constant; calibrated at the smallest `N` when `None`.
    pub c_v: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    #[serde(rename = "N")]
    pub n: usize,
    pub trace_distance: f64,
    pub alpha: f64,
    pub alpha_lambda: f64,
    pub bound: f64,
    pub norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    pub c_v: f64,
    pub calibrated: bool,
    /// `None` when distances are at round-off (no interaction) or too few points.
    pub slope: Option<LogLogFit>,
    /// `α_N^λ ≤ bound` for every `N` above the calibration point.
    pub bound_holds: bool,
}

/// Distances below this are treated as "no deviation" for fitting.
pub const NEGLIGIBLE_DISTANCE: f64 = 1e-8;

struct Outcome {
    point: RatePoint,
    trace: PicklTrace,
}

fn run_one(input: &RateFitInput, n: usize) -> Result<Outcome> {
    let v = ScaledPotential::sample_scaled(input.profile, n, input.beta, input.grid)?;
    let steps = (input.t / input.dt).round() as usize;
    let prop = MbPropagator::with_cap(&v, n, input.dt, input.memory_cap)?;
    let mut psi = factorized_state_capped(&input.phi0, n, input.memory_cap)?;
    prop.evolve_in_place(&mut psi, steps)?;

    let inter = Interaction::Potential(v);
    let mut phi = input.phi0.clone();
    let mut trace = PicklTrace::default();
    trace.push(0.0, &phi);
    for s in 1..=steps {
        phi = hartree::step(&phi, &inter, input.dt)?;
        trace.push(s as f64 * input.dt, &phi);
    }
    let gamma = marginal(&psi);
    let dist = trace_distance(&gamma, &phi)?;
    let a = pickl_alpha(&psi, &phi, input.lambda)?;
    Ok(Outcome {
        point: RatePoint {
            n,
            trace_distance: dist,
            alpha: a.alpha,
            alpha_lambda: a.alpha_lambda,
            bound: f64::NAN,
            norm_drift: (psi.norm() - 1.0).abs(),
        },
        trace,
    })
}

/// Evolve `Ψ_N` and `φ_t` for each `N`, measure `Tr|γ_N − |φ_t⟩⟨φ_t||` and
/// `α`, fit the decay in `N` and check the Pickl bound across `N`.
pub fn rate_fit(input: &RateFitInput) -> Result<RateFit> {
    if input.n_list.is_empty() {
        return Err(Error::InvalidParameter("empty sweep axis".into()));
    }
    let mut ns = input.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let outcomes: Vec<Outcome> = ns
        .par_iter()
        .map(|&n| run_one(input, n).map_err(|e| e.labeled(format!("N={n}"))))
        .collect::<Result<_>>()?;
    // α(0) = 0 for factorized data.
    let alpha0 = 0.0;
    let first = &outcomes[0];
    let (c_v, calibrated) = match input.c_v {
        Some(c) => (c, false),
        None => (
            calibrate_cv(&first.trace, alpha0, first.point.alpha_lambda, first.point.n, input.beta, input.lambda)?,
            true,
        ),
    };
    let mut bound_holds = true;
    let mut points = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        let mut p = o.point;
        p.bound = pickl_bound(&o.trace, c_v, alpha0, p.n, input.beta, input.lambda);
        if (i > 0 || !calibrated) && p.alpha_lambda > p.bound {
            bound_holds = false;
        }
        points.push(p);
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.trace_distance > NEGLIGIBLE_DISTANCE)
        .map(|p| (p.n as f64, p.trace_distance))
        .collect();
    let slope = if usable.len() == points.len() && usable.len() >= 2 {
        Some(loglog_fit(&usable)?)
    } else {
        None
    };
    Ok(RateFit { points, c_v, calibrated, slope, bound_holds })
}
