//! Dense linear-algebra kernels used by the subsolvers and generators.

mod cholesky;
mod eigen;
mod matrix;
mod orth;
mod qr;
pub mod vector;

pub use cholesky::{cholesky_solve, Cholesky};
pub use eigen::{sym_eig, sym_eig_with, EigenDecomposition, DEFAULT_MAX_SWEEPS};
pub use matrix::DenseMatrix;
pub use orth::orthonormalize_rows;
pub use qr::basic_solution;

/// Dense real vector. Plain `Vec<f64>`; the helpers in [`vector`] work on slices.
pub type RealVector = alloc::vec::Vec<f64>;
