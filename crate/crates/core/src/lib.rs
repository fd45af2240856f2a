//! Numerical laboratory for the mean-field dynamics of many bosons.
//!
//! The crate implements the objects of the mean-field theory for bosons
//! with a scaled two-body interaction `v_N(x) = N^{dβ} v(N^β x)`:
//!
//! * [`hartree`] — split-step integration of the Hartree equation and its
//!   cubic NLS limit, with mass, energy, decay and Strichartz diagnostics;
//! * [`pairexc`] — the pair-excitation kernels `sh(2k)`, `ch(2k)` evolved
//!   along the Hartree flow, with the error-term norms they control;
//! * [`manybody`] — exact `N ≤ 5` particle dynamics in one dimension,
//!   marginals, trace distance and the Pickl counting functional;
//! * [`fock`] — truncated Fock space with Weyl and Bogoliubov unitaries;
//! * [`runner`] — configuration, sweeps, fits and reports.
//!
//! Everything lives on a periodic box; see [`spectral::Grid`].
//!
//! ```
//! use mfl_core::spectral::{Field, Grid};
//!
//! let grid = Grid::line(256, 40.0).unwrap();
//! let phi = Field::gaussian(grid, 1.0);
//! assert!((phi.mass() - 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod fock;
pub mod hartree;
pub mod linalg;
pub mod manybody;
pub mod pairexc;
pub mod potential;
pub mod runner;
pub mod spectral;

pub use error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/interactions.md")]
    mod interactions {}
    #[doc = include_str!("../../../book/src/hartree.md")]
    mod hartree {}
    #[doc = include_str!("../../../book/src/pair-excitations.md")]
    mod pair_excitations {}
    #[doc = include_str!("../../../book/src/many-body.md")]
    mod many_body {}
    #[doc = include_str!("../../../book/src/fock.md")]
    mod fock {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
