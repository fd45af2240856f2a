//! Grids, transforms, field and kernel algebra.

pub mod checkpoint;
mod fft;
mod field;
mod grid;
mod kernel;
mod series;

pub use field::{Convolver, Field, Spectrum};
pub(crate) use field::{free_phase_table, free_propagate_in_place};
pub(crate) use fft::{multiply_separable, transform_all, transform_axis};
pub use grid::Grid;
pub use kernel::{laplacian_matrix, Kernel};
pub use series::{ch_series, hyperbolic_residual, sh_series, DEFAULT_SERIES_TOL, MAX_SERIES_TERMS};
