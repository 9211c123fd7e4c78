//! Closed-form solvers for separable l0 problems.
//!
//! For `min sum_i phi_i(x_i)` over a product of sets containing zero, each
//! coordinate either stays at zero or moves to its own minimizer. The saving
//! of moving coordinate `i` is `phi_i(0) - phi_i(x~_i)`. Under a cardinality
//! budget the `r` largest savings win; with an l0 weight `nu` a coordinate is
//! kept exactly when its saving is at least `nu`.
//!
//! Ties are broken toward the lowest index, and a saving equal to `nu` keeps
//! the coordinate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One separable term `phi_i`, summarized by its values at zero and at its
/// minimizer over the coordinate set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub value_at_zero: f64,
    pub minimizer: f64,
    pub value_at_minimizer: f64,
    /// Coordinate constrained to zero; never selected.
    pub forced_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparablePieces {
    pieces: Vec<Piece>,
}

impl SeparablePieces {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        for (i, p) in pieces.iter().enumerate() {
            if !(p.value_at_zero.is_finite() && p.minimizer.is_finite() && p.value_at_minimizer.is_finite()) {
                return Err(Error::invalid(alloc::format!("piece {i} has non-finite data")));
            }
            let slack = 1e-12 * (1.0 + p.value_at_zero.abs());
            if p.value_at_minimizer > p.value_at_zero + slack {
                return Err(Error::invalid(alloc::format!(
                    "piece {i}: value at minimizer {} exceeds value at zero {}",
                    p.value_at_minimizer,
                    p.value_at_zero
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// Pieces `phi_i(t) = (weight / 2) (t - c_i)^2` on the real line.
    pub fn quadratic(c: &[f64], weight: f64, forced_zero: &[bool]) -> Result<Self> {
        check_mask(c.len(), forced_zero)?;
        if !(weight > 0.0) {
            return Err(Error::invalid("quadratic weight must be positive"));
        }
        Self::new(
            c.iter()
                .enumerate()
                .map(|(i, &ci)| Piece {
                    value_at_zero: 0.5 * weight * ci * ci,
                    minimizer: ci,
                    value_at_minimizer: 0.0,
                    forced_zero: forced_zero.get(i).copied().unwrap_or(false),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `sum_i phi_i(x_i)` restricted to the two candidate values per
    /// coordinate (zero or the minimizer).
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .zip(x)
            .map(|(p, &xi)| if xi == 0.0 { p.value_at_zero } else { p.value_at_minimizer })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub x: Vec<f64>,
    /// Selected coordinates, ascending.
    pub selected: Vec<usize>,
    /// Per-coordinate savings that drove the selection.
    pub savings: Vec<f64>,
}

/// Minimizes `sum_i phi_i(x_i)` subject to `||x||_0 <= r`.
///
/// A budget larger than the number of eligible coordinates is clamped.
pub fn solve_cardinality_separable(pieces: &SeparablePieces, r: usize) -> ThresholdResult {
    let savings: Vec<f64> = pieces.pieces.iter().map(|p| p.value_at_zero - p.value_at_minimizer).collect();
    let mut order: Vec<usize> = (0..pieces.len()).filter(|&i| !pieces.pieces[i].forced_zero).collect();
    order.sort_by(|&a, &b| savings[b].total_cmp(&savings[a]));
    let mut selected: Vec<usize> = order.into_iter().take(r).collect();
    selected.sort_unstable();
    let mut x = vec![0.0; pieces.len()];
    for &i in &selected {
        x[i] = pieces.pieces[i].minimizer;
    }
    ThresholdResult { x, selected, savings }
}

/// Minimizes `nu ||x||_0 + sum_i phi_i(x_i)`.
pub fn solve_l0_regularized_separable(pieces: &SeparablePieces, nu: f64) -> Result<ThresholdResult> {
    check_nu(nu)?;
    let savings: Vec<f64> =
        pieces.pieces.iter().map(|p| p.value_at_zero - nu - p.value_at_minimizer).collect();
    let selected: Vec<usize> =
        (0..pieces.len()).filter(|&i| !pieces.pieces[i].forced_zero && savings[i] >= 0.0).collect();
    let mut x = vec![0.0; pieces.len()];
    for &i in &selected {
        x[i] = pieces.pieces[i].minimizer;
    }
    Ok(ThresholdResult { x, selected, savings })
}

/// Keeps the `r` largest `|c_i|` outside the forced-zero mask and zeros the
/// rest. This is the cardinality y-step for quadratic pieces
/// `(rho / 2)(y_i - c_i)^2`, whose solution does not depend on `rho`.
///
/// `forced_zero` is either empty (no mask) or has one flag per coordinate.
pub fn hard_threshold_top_r(c: &[f64], r: usize, forced_zero: &[bool]) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    hard_threshold_top_r_into(c, r, forced_zero, &mut out);
    out
}

pub(crate) fn hard_threshold_top_r_into(c: &[f64], r: usize, forced_zero: &[bool], out: &mut [f64]) {
    debug_assert!(forced_zero.is_empty() || forced_zero.len() == c.len());
    out.fill(0.0);
    if r == 0 {
        return;
    }
    let eligible = |i: usize| !forced_zero.get(i).copied().unwrap_or(false);
    if r >= c.len() {
        for (i, (o, v)) in out.iter_mut().zip(c).enumerate() {
            if eligible(i) {
                *o = *v;
            }
        }
        return;
    }
    let mut order: Vec<usize> = (0..c.len()).filter(|&i| eligible(i)).collect();
    order.sort_by(|&a, &b| c[b].abs().total_cmp(&c[a].abs()));
    for &i in order.iter().take(r) {
        out[i] = c[i];
    }
}

/// Keeps `c_i` when `(rho / 2) c_i^2 >= nu` (boundary kept) and it is not
/// masked; the regularized y-step for quadratic pieces.
pub fn hard_threshold_nu(c: &[f64], nu: f64, rho: f64, forced_zero: &[bool]) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    hard_threshold_nu_into(c, nu, rho, forced_zero, &mut out);
    out
}

pub(crate) fn hard_threshold_nu_into(c: &[f64], nu: f64, rho: f64, forced_zero: &[bool], out: &mut [f64]) {
    for (i, (o, &v)) in out.iter_mut().zip(c).enumerate() {
        let keep = !forced_zero.get(i).copied().unwrap_or(false) && 0.5 * rho * v * v >= nu;
        *o = if keep { v } else { 0.0 };
    }
}

fn check_mask(n: usize, mask: &[bool]) -> Result<()> {
    if !mask.is_empty() && mask.len() != n {
        return Err(Error::invalid(alloc::format!("forced-zero mask has length {}, expected {n}", mask.len())));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::invalid(alloc::format!("l0 weight must be finite and nonnegative, got {nu}")));
    }
    Ok(())
}
