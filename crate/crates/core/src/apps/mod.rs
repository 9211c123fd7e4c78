//! Applications.

pub mod counterexample;
pub mod covsel;
pub mod cs;
pub mod iht;
pub mod logistic;
