use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic box `[-L/2, L/2)^dim` sampled with `M` points per axis.
///
/// Samples sit at `x_j = -L/2 + j·dx`. Wavenumbers follow the standard DFT
/// ordering `0, 1, …, M/2-1, -M/2, …, -1` scaled by `2π/L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be even and at least 2, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid {
            dim,
            points,
            length,
        })
    }

    /// One-dimensional grid; the common case for kernels and many-body runs.
    pub fn line(points: usize, length: f64) -> Result<Self> {
        Grid::new(1, points, length)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of samples, `M^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `dx^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points)
            .map(|j| (j as f64 - (self.points / 2) as f64) * dx)
            .collect()
    }

    /// Signed DFT index for storage index `j`.
    pub fn signed_index(&self, j: usize) -> i64 {
        let m = self.points as i64;
        let j = j as i64;
        if j < m / 2 {
            j
        } else {
            j - m
        }
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        let scale = 2.0 * PI / self.length;
        (0..self.points)
            .map(|j| scale * self.signed_index(j) as f64)
            .collect()
    }

    /// Largest representable wavenumber magnitude, `π/dx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Per-axis storage indices of a flat index (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// Physical position of a flat index, padded with zeros beyond `dim`.
    /// Computed as `(j − M/2)·dx` so mirrored points are exact negatives.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let dx = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = (idx[axis] as f64 - (self.points / 2) as f64) * dx;
        }
        x
    }

    /// Squared wavenumber magnitude of a flat spectral index.
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let idx = self.unravel(flat);
        let scale = 2.0 * PI / self.length;
        (0..self.dim)
            .map(|a| {
                let k = scale * self.signed_index(idx[a]) as f64;
                k * k
            })
            .sum()
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    pub fn ensure_line(&self) -> Result<()> {
        if self.dim == 1 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "operation requires a one-dimensional grid, got dim={}",
                self.dim
            )))
        }
    }
}
