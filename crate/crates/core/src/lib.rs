//! Penalty decomposition (PD) methods for sparse optimization.
//!
//! Two problem forms are supported:
//!
//! - cardinality constrained: `min f(x)` subject to `g(x) <= 0`, `h(x) = 0`,
//!   `x ∈ X` and `||x_J||_0 <= r`;
//! - l0 regularized: `min f(x) + nu ||x_J||_0` under the same constraints.
//!
//! The solver splits `x_J` from a copy `y`, penalizes the splitting and the
//! constraint violations quadratically, and minimizes the penalty function by
//! alternating an `x`-step (a smooth subproblem) with a closed-form `y`-step
//! (hard thresholding). The penalty parameter grows geometrically between
//! outer iterations.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. IO, instance generation and the command line live in the
//! `sparsepd` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod apps;
pub mod bcd;
mod error;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod pd;
pub mod subsolvers;
pub mod threshold;

pub use error::{Error, Result};

/// Entries with magnitude at or below this value count as zero in support
/// computations on floating-point iterates.
pub const SUPPORT_TOL: f64 = 1e-8;
