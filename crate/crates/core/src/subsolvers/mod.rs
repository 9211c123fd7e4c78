//! Solvers for the smooth `x`-subproblems.

mod affine;
mod cg;
mod logdet;
mod spg;

pub use affine::AffineProjector;
pub use cg::{cg_solve, CgOutcome};
pub use logdet::{logdet_prox, logdet_prox_eigenvalue};
pub use spg::{spg_minimize, SpgConfig, SpgOutcome};
