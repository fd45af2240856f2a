//! Small self-contained dense and sparse linear algebra.

pub mod dense;
mod hermitian;
mod krylov;
mod sparse;

pub use hermitian::{eigh, HermitianEigen, JACOBI_TOL};
pub use krylov::{expm_hermitian, KrylovStats, DEFAULT_KRYLOV_TOL};
pub use sparse::Csr;
