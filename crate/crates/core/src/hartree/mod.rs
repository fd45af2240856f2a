//! Split-step integration of the scaled Hartree equation
//! `(1/i)∂tφ − Δφ + (v_N∗|φ|²)φ = 0` and of its cubic (contact) limit.

mod diagnostics;

pub use diagnostics::{
    decay_fit, hartree_to_nls_distance, is_admissible, strichartz_window_norm, wraparound_horizon,
    DecayFit,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::ScaledPotential;
use crate::spectral::{free_propagate_in_place, Field};
use crate::C64;

/// The nonlinearity: either a convolution potential or a contact coupling `g`.
#[derive(Clone, Debug)]
pub enum Interaction {
    Potential(ScaledPotential),
    Contact(f64),
}

impl Interaction {
    /// The self-consistent potential `v_N∗|φ|²` (or `g|φ|²`) at each sample.
    pub fn mean_field(&self, phi: &Field) -> Result<Vec<f64>> {
        match self {
            Interaction::Potential(v) => {
                if v.is_zero() {
                    return Ok(vec![0.0; phi.values().len()]);
                }
                Ok(v.convolve(&phi.density())?.values().iter().map(|z| z.re).collect())
            }
            Interaction::Contact(g) => Ok(phi.values().iter().map(|z| g * z.norm_sqr()).collect()),
        }
    }

    pub fn is_free(&self) -> bool {
        match self {
            Interaction::Potential(v) => v.is_zero(),
            Interaction::Contact(g) => *g == 0.0,
        }
    }
}

fn apply_phase(phi: &mut Field, potential: &[f64], dt: f64) {
    for (z, &v) in phi.values_mut().iter_mut().zip(potential) {
        *z *= C64::from_polar(1.0, -dt * v);
    }
}

fn check_finite(phi: &Field, what: &str) -> Result<()> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what}: non-finite values after step")))
    }
}

/// One Strang step: half free flight, nonlinear phase, half free flight.
///
/// Negative `dt` steps backwards; a step followed by its negative returns
/// the input up to rounding.
pub fn step(phi: &Field, interaction: &Interaction, dt: f64) -> Result<Field> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be finite, got {dt}")));
    }
    let mut out = phi.clone();
    let g = *phi.grid();
    free_propagate_in_place(out.values_mut(), &g, 0.5 * dt);
    if !interaction.is_free() {
        let v = interaction.mean_field(&out)?;
        apply_phase(&mut out, &v, dt);
    }
    free_propagate_in_place(out.values_mut(), &g, 0.5 * dt);
    check_finite(&out, "split-step")?;
    Ok(out)
}

pub fn hartree_step(phi: &Field, v: &ScaledPotential, dt: f64) -> Result<Field> {
    phi.grid().ensure_same(v.grid())?;
    step(phi, &Interaction::Potential(v.clone()), dt)
}

/// Cubic NLS step for `(1/i)∂tφ − Δφ + g|φ|²φ = 0`.
pub fn nls_step(phi: &Field, g: f64, dt: f64) -> Result<Field> {
    step(phi, &Interaction::Contact(g), dt)
}

/// Advance `steps` Strang steps, fusing adjacent half free flights.
pub fn evolve(phi: &Field, interaction: &Interaction, dt: f64, steps: usize) -> Result<Field> {
    if steps == 0 {
        return Ok(phi.clone());
    }
    let g = *phi.grid();
    let mut out = phi.clone();
    if interaction.is_free() {
        free_propagate_in_place(out.values_mut(), &g, dt * steps as f64);
        return Ok(out);
    }
    free_propagate_in_place(out.values_mut(), &g, 0.5 * dt);
    for s in 0..steps {
        let v = interaction.mean_field(&out)?;
        apply_phase(&mut out, &v, dt);
        let flight = if s + 1 == steps { 0.5 * dt } else { dt };
        free_propagate_in_place(out.values_mut(), &g, flight);
    }
    check_finite(&out, "split-step")?;
    Ok(out)
}

/// `E = ∫|∇φ|² + ½∫(v_N∗|φ|²)|φ|²` (contact: `g/2 ∫|φ|⁴`).
pub fn energy(phi: &Field, interaction: &Interaction) -> Result<f64> {
    let kinetic = phi.gradient_sq();
    if interaction.is_free() {
        return Ok(kinetic);
    }
    let v = interaction.mean_field(phi)?;
    let pot: f64 = v
        .iter()
        .zip(phi.values())
        .map(|(v, z)| v * z.norm_sqr())
        .sum::<f64>()
        * phi.grid().cell_volume();
    Ok(kinetic + 0.5 * pot)
}

/// `‖Δ|φ|²‖_{L²}`, one of the inputs to the Pickl bound.
pub fn laplacian_density_norm(phi: &Field) -> f64 {
    phi.density().laplacian().l2()
}

/// One recorded sample of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub linf: f64,
    pub h_half: f64,
    pub lap_density: f64,
}

pub fn observe(phi: &Field, interaction: &Interaction, t: f64) -> Result<Observables> {
    Ok(Observables {
        t,
        mass: phi.mass(),
        energy: energy(phi, interaction)?,
        linf: phi.linf(),
        h_half: phi.half_deriv_norm(),
        lap_density: laplacian_density_norm(phi),
    })
}

/// A recorded Hartree (or NLS) trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Observables>,
    /// `(r, t, ‖φ(t)‖_{L^r})` for each extra exponent requested.
    pub lr_norms: Vec<(f64, Vec<f64>)>,
    pub final_state: Field,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// `(t, ‖φ(t)‖_∞)` pairs.
    pub fn linf_series(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, s.linf)).collect()
    }

    /// `‖φ(t)‖_{L^r}` at each sample, if it was recorded.
    pub fn lr_series(&self, r: f64) -> Option<Vec<f64>> {
        if r == 2.0 {
            return Some(self.samples.iter().map(|s| s.mass.sqrt()).collect());
        }
        if r.is_infinite() {
            return Some(self.samples.iter().map(|s| s.linf).collect());
        }
        self.lr_norms
            .iter()
            .find(|(q, _)| (q - r).abs() < 1e-12)
            .map(|(_, v)| v.clone())
    }
}

/// Heuristic size of `‖φ₀‖_{Ḣ^{1/2}}·‖v‖_{L¹}` above which a run is labeled
/// large-data (no constant is available from the theory).
pub const SMALLNESS_HEURISTIC: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct HartreeRun {
    pub interaction: Interaction,
    pub initial: Field,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Extra `L^r` exponents to record for Strichartz norms.
    pub record_lr: Vec<f64>,
}

impl HartreeRun {
    pub fn new(interaction: Interaction, initial: Field, dt: f64, t_end: f64) -> Self {
        HartreeRun {
            interaction,
            initial,
            dt,
            t_end,
            record_every: 1,
            record_lr: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn run(&self) -> Result<Trajectory> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        let mut warnings = Vec::new();
        if let Interaction::Potential(v) = &self.interaction {
            let l1: f64 = v.samples().norm(1.0)?;
            let size = self.initial.half_deriv_norm() * l1;
            if size > SMALLNESS_HEURISTIC {
                warnings.push(format!(
                    "exploratory: ‖φ₀‖_Ḣ½·‖v‖_L¹ = {size:.3} exceeds the small-data heuristic {SMALLNESS_HEURISTIC}"
                ));
            }
        }
        let steps = self.steps();
        let mut phi = self.initial.clone();
        let mut samples = vec![observe(&phi, &self.interaction, 0.0)?];
        let mut lr: Vec<(f64, Vec<f64>)> = self.record_lr.iter().map(|&r| (r, Vec::new())).collect();
        let push_lr = |phi: &Field, lr: &mut Vec<(f64, Vec<f64>)>| -> Result<()> {
            for (r, v) in lr.iter_mut() {
                v.push(phi.norm(*r)?);
            }
            Ok(())
        };
        push_lr(&phi, &mut lr)?;
        let mut done = 0;
        while done < steps {
            let chunk = self.record_every.min(steps - done);
            phi = evolve(&phi, &self.interaction, self.dt, chunk)?;
            done += chunk;
            samples.push(observe(&phi, &self.interaction, done as f64 * self.dt)?);
            push_lr(&phi, &mut lr)?;
        }
        Ok(Trajectory {
            samples,
            lr_norms: lr,
            final_state: phi,
            warnings,
        })
    }
}
