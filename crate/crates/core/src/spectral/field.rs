use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::spectral::fft;
use crate::spectral::Grid;
use crate::C64;

/// A complex scalar field sampled on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<C64>,
}

/// Physical Fourier coefficients: `f(x) = Σ_k c_k e^{i k·x}`.
///
/// With this normalization a constant field `1` has `c_0 = 1`, and Parseval
/// reads `‖f‖² = L^dim Σ |c_k|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<C64>,
}

/// Parity `(-1)^{Σ_a j_a}` of a flat spectral index; accounts for the box
/// starting at `-L/2`.
fn parity(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let s: usize = idx[..grid.dim()].iter().sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Field {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite sample at index {i}")));
        }
        Ok(Field { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Field::from_raw(grid, vec![C64::new(0.0, 0.0); grid.len()])
    }

    /// Sample `f` at every grid point; unused coordinates are zero.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Field::from_raw(grid, values)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Field::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Isotropic normalized Gaussian `(πσ²)^{-dim/4} e^{-|x|²/(2σ²)}`.
    pub fn gaussian(grid: Grid, sigma: f64) -> Self {
        let d = grid.dim() as f64;
        let c = (std::f64::consts::PI * sigma * sigma).powf(-d / 4.0);
        Field::from_real_fn(grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            c * (-r2 / (2.0 * sigma * sigma)).exp()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `L^p` norm with quadrature weight `dx^dim`; `p = f64::INFINITY` gives the sup.
    pub fn norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("norm exponent must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.linf());
        }
        let w = self.grid.cell_volume();
        let s: f64 = if p == 2.0 {
            self.values.iter().map(|v| v.norm_sqr()).sum()
        } else {
            self.values.iter().map(|v| v.norm().powf(p)).sum()
        };
        Ok((s * w).powf(1.0 / p))
    }

    pub fn l2(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `∫|f|²`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `‖|ξ|^{1/2} f̂‖_{L²}`, the homogeneous `Ḣ^{1/2}` seminorm.
    pub fn half_deriv_norm(&self) -> f64 {
        let spec = self.forward();
        let s: f64 = spec
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.wavenumber_sq(i).sqrt() * c.norm_sqr())
            .sum();
        (s * self.grid.volume()).sqrt()
    }

    /// `‖∇f‖²_{L²}`, computed spectrally.
    pub fn gradient_sq(&self) -> f64 {
        let spec = self.forward();
        let s: f64 = spec
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.wavenumber_sq(i) * c.norm_sqr())
            .sum();
        s * self.grid.volume()
    }

    /// `∫ f̄ g`.
    pub fn inner(&self, other: &Field) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scaled(&self, c: C64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn conj(&self) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| v.conj()).collect())
    }

    /// `|f|²` as a field.
    pub fn density(&self) -> Field {
        Field::from_raw(
            self.grid,
            self.values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect(),
        )
    }

    pub fn normalized(&self) -> Result<Field> {
        let n = self.l2();
        if n == 0.0 {
            return Err(Error::InvalidParameter("cannot normalize the zero field".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn forward(&self) -> Spectrum {
        let g = self.grid;
        let mut c = self.values.clone();
        fft::transform_all(&mut c, g.points(), g.dim(), false);
        let norm = 1.0 / g.len() as f64;
        for (i, v) in c.iter_mut().enumerate() {
            *v *= parity(&g, i) * norm;
        }
        Spectrum { grid: g, coeffs: c }
    }

    /// Apply a Fourier multiplier given as a function of `|ξ|²`.
    pub fn apply_radial_symbol(&self, symbol: impl Fn(f64) -> C64) -> Field {
        let g = self.grid;
        let mut c = self.values.clone();
        fft::transform_all(&mut c, g.points(), g.dim(), false);
        let norm = 1.0 / g.len() as f64;
        for (i, v) in c.iter_mut().enumerate() {
            *v *= symbol(g.wavenumber_sq(i)) * norm;
        }
        fft::transform_all(&mut c, g.points(), g.dim(), true);
        Field::from_raw(g, c)
    }

    /// Spectral Laplacian `Δf`.
    pub fn laplacian(&self) -> Field {
        self.apply_radial_symbol(|k2| C64::new(-k2, 0.0))
    }

    /// Free Schrödinger flow `e^{itΔ}`: multiplies the coefficient at `ξ` by `e^{-i|ξ|²t}`.
    pub fn free_propagate(&self, t: f64) -> Field {
        let mut out = self.clone();
        free_propagate_in_place(&mut out.values, &self.grid, t);
        out
    }

    /// Periodic convolution approximating `∫a(x-y)b(y)dy`.
    pub fn convolve(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Convolver::new(self).apply(other))
    }

    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `‖self - other‖_{L²}`.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }
}

/// Per-axis table `e^{-i k_j² t}` in raw FFT ordering (already divided by `M`).
pub(crate) fn free_phase_table(grid: &Grid, t: f64) -> Vec<C64> {
    let inv = 1.0 / grid.points() as f64;
    grid.wavenumbers()
        .iter()
        .map(|k| C64::from_polar(inv, -k * k * t))
        .collect()
}

pub(crate) fn free_propagate_in_place(values: &mut [C64], grid: &Grid, t: f64) {
    if t == 0.0 {
        return;
    }
    let table = free_phase_table(grid, t);
    fft::transform_all(values, grid.points(), grid.dim(), false);
    fft::multiply_separable(values, grid.points(), grid.dim(), &table);
    fft::transform_all(values, grid.points(), grid.dim(), true);
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn inverse(&self) -> Field {
        let g = self.grid;
        let mut v: Vec<C64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * parity(&g, i))
            .collect();
        fft::transform_all(&mut v, g.points(), g.dim(), true);
        Field::from_raw(g, v)
    }

    /// `L^dim Σ|c_k|²`, equal to the physical-space mass.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume()
    }

    /// Smallest `R` such that the ball `|ξ| ≤ R` holds `fraction` of the mass.
    pub fn mass_radius(&self, fraction: f64) -> f64 {
        let mut pairs: Vec<(f64, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (self.grid.wavenumber_sq(i).sqrt(), c.norm_sqr()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        for (k, w) in &pairs {
            acc += w;
            if acc >= fraction * total {
                return *k;
            }
        }
        pairs.last().map_or(0.0, |p| p.0)
    }
}

/// Convolution against a fixed field, with its transform cached.
///
/// Used for `v_N ∗ ·` in every solver; it also convolves along one index of
/// a kernel matrix.
#[derive(Clone, Debug)]
pub struct Convolver {
    grid: Grid,
    symbol: Vec<C64>,
}

impl Convolver {
    pub fn new(a: &Field) -> Self {
        let g = *a.grid();
        // Raw-FFT-space multiplier; the parity factors of the shifted box cancel.
        let mut symbol = a.values.clone();
        fft::transform_all(&mut symbol, g.points(), g.dim(), false);
        let w = g.cell_volume() / g.len() as f64;
        for (i, s) in symbol.iter_mut().enumerate() {
            *s *= parity(&g, i) * w;
        }
        Convolver { grid: g, symbol }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply(&self, b: &Field) -> Field {
        debug_assert_eq!(&self.grid, b.grid());
        let g = self.grid;
        let mut v = b.values.clone();
        fft::transform_all(&mut v, g.points(), g.dim(), false);
        v.iter_mut().zip(&self.symbol).for_each(|(x, s)| *x *= s);
        fft::transform_all(&mut v, g.points(), g.dim(), true);
        Field::from_raw(g, v)
    }

    /// Convolve every line of an `M×M` matrix along `axis` (0 = rows index `x`).
    /// Only meaningful for one-dimensional convolvers.
    pub(crate) fn apply_along(&self, data: &mut [C64], axis: usize) {
        debug_assert_eq!(self.grid.dim(), 1);
        let m = self.grid.points();
        fft::transform_axis(data, m, 2, axis, false);
        if axis == 0 {
            for (j, row) in data.chunks_mut(m).enumerate() {
                let s = self.symbol[j];
                row.iter_mut().for_each(|x| *x *= s);
            }
        } else {
            for row in data.chunks_mut(m) {
                row.iter_mut().zip(&self.symbol).for_each(|(x, s)| *x *= s);
            }
        }
        fft::transform_axis(data, m, 2, axis, true);
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in field addition");
        Field::from_raw(
            self.grid,
            self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in field subtraction");
        Field::from_raw(
            self.grid,
            self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Mul<C64> for &Field {
    type Output = Field;
    fn mul(self, rhs: C64) -> Field {
        self.scaled(rhs)
    }
}
