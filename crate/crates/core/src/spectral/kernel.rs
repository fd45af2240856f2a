use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{fft, Field, Grid};
use crate::C64;

/// A complex two-point function `K(x, y)` on a one-dimensional grid.
///
/// Stored row-major as an `M×M` matrix. As an operator it acts by
/// `(Kf)(x) = Σ_y K(x,y) f(y) dx`, so composition carries one factor `dx`
/// and the identity is the discrete delta `δ_h = I/dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    grid: Grid,
    values: Vec<C64>,
}

impl Kernel {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        grid.ensure_line()?;
        let m = grid.points();
        if values.len() != m * m {
            return Err(Error::GridMismatch(format!(
                "expected {} kernel entries, got {}",
                m * m,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("non-finite kernel entry".into()));
        }
        Ok(Kernel { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.points() * grid.points());
        Kernel { grid, values }
    }

    pub fn zeros(grid: Grid) -> Result<Self> {
        grid.ensure_line()?;
        let m = grid.points();
        Ok(Kernel::from_raw(grid, vec![C64::new(0.0, 0.0); m * m]))
    }

    /// The discrete delta kernel `1/dx` on the diagonal.
    pub fn delta(grid: Grid) -> Result<Self> {
        let mut k = Kernel::zeros(grid)?;
        let m = grid.points();
        let d = 1.0 / grid.spacing();
        for i in 0..m {
            k.values[i * m + i] = C64::new(d, 0.0);
        }
        Ok(k)
    }

    /// Sample `f(x, y)` at grid points.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        grid.ensure_line()?;
        let xs = grid.coordinates();
        let values = xs
            .iter()
            .flat_map(|&x| xs.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Ok(Kernel::from_raw(grid, values))
    }

    /// `c · a(x) b(y)`.
    pub fn outer(a: &Field, b: &Field, c: C64) -> Result<Self> {
        a.grid().ensure_same(b.grid())?;
        a.grid().ensure_line()?;
        let values = a
            .values()
            .iter()
            .flat_map(|&x| b.values().iter().map(move |&y| c * x * y))
            .collect();
        Ok(Kernel::from_raw(*a.grid(), values))
    }

    /// Kernel of an operator given as a matrix `A` acting on samples:
    /// `K = A / dx`.
    pub fn from_operator_matrix(grid: Grid, matrix: &[C64]) -> Result<Self> {
        let dx = grid.spacing();
        Kernel::new(grid, matrix.iter().map(|v| v / dx).collect())
    }

    /// Operator matrix `K·dx` acting on sample vectors.
    pub fn operator_matrix(&self) -> Vec<C64> {
        let dx = self.grid.spacing();
        self.values.iter().map(|v| v * dx).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn points(&self) -> usize {
        self.grid.points()
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

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.points() + j]
    }

    /// Diagonal samples `K(x, x)`.
    pub fn diagonal(&self) -> Vec<C64> {
        let m = self.points();
        (0..m).map(|i| self.values[i * m + i]).collect()
    }

    /// `(A∘B)(x,y) = Σ_z A(x,z) B(z,y) dx`.
    pub fn compose(&self, other: &Kernel) -> Result<Kernel> {
        self.grid.ensure_same(&other.grid)?;
        let m = self.points();
        let dx = self.grid.spacing();
        let mut out = vec![C64::new(0.0, 0.0); m * m];
        out.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            let a_row = &self.values[i * m..(i + 1) * m];
            for (z, &a) in a_row.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let a = a * dx;
                let b_row = &other.values[z * m..(z + 1) * m];
                for (o, &b) in row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        });
        Ok(Kernel::from_raw(self.grid, out))
    }

    pub fn transpose(&self) -> Kernel {
        let m = self.points();
        let mut out = vec![C64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                out[j * m + i] = self.values[i * m + j];
            }
        }
        Kernel::from_raw(self.grid, out)
    }

    pub fn conj(&self) -> Kernel {
        Kernel::from_raw(self.grid, self.values.iter().map(|v| v.conj()).collect())
    }

    /// Operator adjoint, `K*(x,y) = conj K(y,x)`.
    pub fn adjoint(&self) -> Kernel {
        self.transpose().conj()
    }

    /// Hilbert–Schmidt norm `(∫∫|K|²)^{1/2}`.
    pub fn l2(&self) -> f64 {
        let dx = self.grid.spacing();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |K(x,y) - K(y,x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.points();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                d = d.max((self.values[i * m + j] - self.values[j * m + i]).norm());
            }
        }
        d
    }

    /// `max |K(x,y) - conj K(y,x)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.points();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in i..m {
                d = d.max((self.values[i * m + j] - self.values[j * m + i].conj()).norm());
            }
        }
        d
    }

    /// Symmetric part `(K + Kᵀ)/2`.
    pub fn symmetrized(&self) -> Kernel {
        let t = self.transpose();
        Kernel::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&t.values)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }

    pub fn scaled(&self, c: C64) -> Kernel {
        Kernel::from_raw(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Kernel) -> Result<Kernel> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c·other`, in place.
    pub fn axpy(&mut self, c: C64, other: &Kernel) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += c * b);
        Ok(())
    }

    fn zip_with(&self, other: &Kernel, f: impl Fn(C64, C64) -> C64) -> Result<Kernel> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Kernel::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Apply the two-variable free flows in place.
    ///
    /// `sign = +1` multiplies the coefficient at `(ξ, η)` by `e^{-it(ξ²+η²)}`
    /// (the flow of `S`); `sign = -1` uses `e^{-it(ξ²-η²)}` (the commutator
    /// flow of `W`).
    pub(crate) fn free_flow_in_place(&mut self, t: f64, sign: f64) {
        let m = self.points();
        let k = self.grid.wavenumbers();
        let inv = 1.0 / m as f64;
        let wx: Vec<C64> = k.iter().map(|k| C64::from_polar(inv, -k * k * t)).collect();
        let wy: Vec<C64> = k.iter().map(|k| C64::from_polar(inv, -sign * k * k * t)).collect();
        let v = &mut self.values;
        fft::transform_axis(v, m, 2, 0, false);
        fft::transform_axis(v, m, 2, 1, false);
        for (i, row) in v.chunks_mut(m).enumerate() {
            for (x, w) in row.iter_mut().zip(&wy) {
                *x *= wx[i] * w;
            }
        }
        fft::transform_axis(v, m, 2, 0, true);
        fft::transform_axis(v, m, 2, 1, true);
    }

    /// Apply `f(x)` on the left and `g(y)` on the right: `f(x) K(x,y) g(y)`.
    pub fn diag_scale(&self, left: &[C64], right: &[C64]) -> Kernel {
        let m = self.points();
        let mut out = self.values.clone();
        for (i, row) in out.chunks_mut(m).enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= left[i] * right[j];
            }
        }
        Kernel::from_raw(self.grid, out)
    }
}


/// Row-major matrix of the spectral Laplacian acting on sample vectors of a
/// one-dimensional grid (real symmetric for even `M`).
pub fn laplacian_matrix(grid: &Grid) -> Result<Vec<C64>> {
    grid.ensure_line()?;
    let m = grid.points();
    let mut out = vec![C64::new(0.0, 0.0); m * m];
    for j in 0..m {
        let mut e = vec![C64::new(0.0, 0.0); m];
        e[j] = C64::new(1.0, 0.0);
        let col = Field::from_raw(*grid, e).laplacian();
        for (i, v) in col.values().iter().enumerate() {
            out[i * m + j] = *v;
        }
    }
    Ok(out)
}
