//! Compactly supported interaction profiles and the `N^{dβ} v(N^β x)` scaling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Convolver, Field, Grid};

/// Minimum number of grid spacings across the scaled support `[-r_N, r_N]`.
pub const MIN_POINTS_ACROSS_SUPPORT: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Attractive,
    Repulsive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    /// `v ≡ 0`.
    Zero,
    /// `∓a·exp(-1/(1-|x/r|²))` for `|x| < r`, zero outside.
    Bump { amplitude: f64, radius: f64, sign: Sign },
}

impl Profile {
    pub fn bump(amplitude: f64, radius: f64, sign: Sign) -> Result<Profile> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bump amplitude must be non-negative, got {amplitude}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bump radius must be positive, got {radius}"
            )));
        }
        Ok(Profile::Bump { amplitude, radius, sign })
    }

    pub fn attractive(amplitude: f64, radius: f64) -> Result<Profile> {
        Profile::bump(amplitude, radius, Sign::Attractive)
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Profile::Zero => true,
            Profile::Bump { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Profile value at distance `r` from the origin.
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Bump { amplitude, radius, sign } => {
                let u = r / radius;
                if u.abs() >= 1.0 {
                    return 0.0;
                }
                let v = amplitude * (-1.0 / (1.0 - u * u)).exp();
                match sign {
                    Sign::Attractive => -v,
                    Sign::Repulsive => v,
                }
            }
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Bump { radius, .. } => radius,
        }
    }

    /// `∫_{ℝ^dim} v`, by radial quadrature on a fine mesh.
    pub fn coupling_constant(&self, dim: usize) -> f64 {
        let r = self.support_radius();
        if self.is_zero() || r == 0.0 {
            return 0.0;
        }
        let sphere = match dim {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        // The integrand is C^∞ and flat at both ends, so the composite
        // trapezoid rule converges faster than any power of the step.
        let n = 4000;
        let h = r / n as f64;
        let s: f64 = (1..n)
            .map(|i| {
                let rho = i as f64 * h;
                self.eval(rho) * rho.powi(dim as i32 - 1)
            })
            .sum();
        // The ρ = 0 endpoint only contributes in one dimension.
        let origin = if dim == 1 { 0.5 * self.eval(0.0) } else { 0.0 };
        sphere * (s + origin) * h
    }
}

/// `v_N(x) = N^{dim·β} v(N^β x)` sampled on a grid.
#[derive(Clone, Debug)]
pub struct ScaledPotential {
    profile: Profile,
    n: usize,
    beta: f64,
    samples: Field,
    convolver: Convolver,
}

/// Scaled support radius `N^{-β} r`.
pub fn scaled_radius(profile: &Profile, n: usize, beta: f64) -> f64 {
    profile.support_radius() * (n as f64).powf(-beta)
}

impl ScaledPotential {
    /// Sample with the resolution and fit-in-box guards.
    pub fn sample_scaled(profile: Profile, n: usize, beta: f64, grid: Grid) -> Result<Self> {
        Self::build(profile, n, beta, grid, true)
    }

    /// Sample without the resolution guard, for few-site lattice models where
    /// the potential is a list of site couplings rather than a resolved profile.
    pub fn sample_lattice(profile: Profile, n: usize, beta: f64, grid: Grid) -> Result<Self> {
        Self::build(profile, n, beta, grid, false)
    }

    pub fn zero(grid: Grid) -> Self {
        Self::build(Profile::Zero, 1, 0.0, grid, false).expect("zero profile always fits")
    }

    fn build(profile: Profile, n: usize, beta: f64, grid: Grid, resolve: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0,1], got {beta}")));
        }
        let d = grid.dim() as f64;
        let nf = n as f64;
        if !profile.is_zero() {
            let rs = scaled_radius(&profile, n, beta);
            if rs >= 0.5 * grid.length() {
                return Err(Error::Guard(format!(
                    "scaled support radius {rs:.4} does not fit in the box of half-width {:.4}",
                    0.5 * grid.length()
                )));
            }
            if resolve && 2.0 * rs < MIN_POINTS_ACROSS_SUPPORT * grid.spacing() {
                return Err(Error::Guard(format!(
                    "scaled support of width {:.4} spans only {:.1} grid spacings (need {MIN_POINTS_ACROSS_SUPPORT}) at N={n}, beta={beta}",
                    2.0 * rs,
                    2.0 * rs / grid.spacing()
                )));
            }
        }
        let amp = nf.powf(d * beta);
        let scale = nf.powf(beta);
        let samples = Field::from_real_fn(grid, |x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            amp * profile.eval(scale * r)
        });
        let convolver = Convolver::new(&samples);
        Ok(ScaledPotential { profile, n, beta, samples, convolver })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &Grid {
        self.samples.grid()
    }

    pub fn samples(&self) -> &Field {
        &self.samples
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_zero()
    }

    /// `v_N ∗ f`.
    pub fn convolve(&self, f: &Field) -> Result<Field> {
        self.grid().ensure_same(f.grid())?;
        Ok(self.convolver.apply(f))
    }

    pub(crate) fn convolver(&self) -> &Convolver {
        &self.convolver
    }

    /// Value `v_N(x_i - x_j)` on a one-dimensional grid, by index difference.
    pub fn at_offset(&self, i: usize, j: usize) -> f64 {
        let m = self.grid().points();
        self.samples.values()[(i + m + m / 2 - j) % m].re
    }

    /// `∫ v_N` by grid quadrature.
    pub fn integral(&self) -> f64 {
        self.samples.values().iter().map(|v| v.re).sum::<f64>() * self.grid().cell_volume()
    }

    pub fn l2(&self) -> f64 {
        self.samples.l2()
    }

    pub fn linf(&self) -> f64 {
        self.samples.linf()
    }
}
