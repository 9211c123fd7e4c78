//! Instance generators, CSV formats and experiment runners for
//! `sparsepd-core`.

pub mod csv_io;
mod error;
pub mod experiments;
pub mod gen;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};
