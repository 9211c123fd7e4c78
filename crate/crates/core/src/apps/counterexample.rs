//! A system where the sparsest solution loses to a dense one under the
//! `l_p` quasi-norm penalty `||A x - b||^2 / 2 + nu ||x||_p`.
//!
//! With `b = b1 + b2`, `alpha = ||(b1; b2)||_p` and
//! `A = [b1, b2, alpha I, alpha I]`, the sparse solution `x_s = (1, 1, 0, ..)`
//! costs `2^{1/p} nu` while `x_bar = (0, 0, b1 / alpha, b2 / alpha)` costs
//! `nu`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{vector, DenseMatrix};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub p_exponent: f64,
    pub nu: f64,
    pub alpha: f64,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_sparse: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub f_sparse: f64,
    pub f_bar: f64,
    /// `(f(x_s) - f(x_bar)) / f(x_bar)`
    pub ratio: f64,
    /// `2^{1/p} - 1`
    pub ratio_bound: f64,
    pub residual_sparse: f64,
    pub residual_bar: f64,
    /// `||x_bar||_p`
    pub norm_bar: f64,
}

/// `(sum |x_i|^p)^{1/p}`
pub fn lp_quasi_norm(x: &[f64], p: f64) -> f64 {
    let s: f64 = x.iter().filter(|v| **v != 0.0).map(|v| math::powf(v.abs(), p)).sum();
    if s == 0.0 {
        0.0
    } else {
        math::powf(s, 1.0 / p)
    }
}

fn lp_objective(a: &DenseMatrix, b: &[f64], x: &[f64], nu: f64, p: f64) -> (f64, f64) {
    let ax = a.mul_vec(x);
    let res = vector::dist2(&ax, b);
    (0.5 * res * res + nu * lp_quasi_norm(x, p), res)
}

pub fn lp_counterexample(p_exponent: f64, nu: f64, b1: &[f64], b2: &[f64]) -> Result<CounterexampleReport> {
    if !(p_exponent > 0.0 && p_exponent <= 1.0) {
        return Err(Error::invalid(alloc::format!("exponent must lie in (0, 1], got {p_exponent}")));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::invalid("nu must be positive"));
    }
    let n = b1.len();
    if n == 0 || b2.len() != n {
        return Err(Error::invalid("b1 and b2 must be nonempty and of equal length"));
    }
    let stacked: Vec<f64> = b1.iter().chain(b2).copied().collect();
    let alpha = lp_quasi_norm(&stacked, p_exponent);
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("(b1; b2) must be nonzero and finite"));
    }
    let b: Vec<f64> = b1.iter().zip(b2).map(|(u, v)| u + v).collect();
    let cols = 2 + 2 * n;
    let a = DenseMatrix::from_fn(n, cols, |i, j| match j {
        0 => b1[i],
        1 => b2[i],
        j if j - 2 == i => alpha,
        j if j >= 2 + n && j - 2 - n == i => alpha,
        _ => 0.0,
    });
    let mut x_sparse = vec![0.0; cols];
    x_sparse[0] = 1.0;
    x_sparse[1] = 1.0;
    let mut x_bar = vec![0.0; cols];
    for i in 0..n {
        x_bar[2 + i] = b1[i] / alpha;
        x_bar[2 + n + i] = b2[i] / alpha;
    }
    let (f_sparse, residual_sparse) = lp_objective(&a, &b, &x_sparse, nu, p_exponent);
    let (f_bar, residual_bar) = lp_objective(&a, &b, &x_bar, nu, p_exponent);
    let norm_bar = lp_quasi_norm(&x_bar, p_exponent);
    Ok(CounterexampleReport {
        p_exponent,
        nu,
        alpha,
        a,
        b,
        x_sparse,
        x_bar,
        f_sparse,
        f_bar,
        ratio: (f_sparse - f_bar) / f_bar,
        ratio_bound: math::powf(2.0, 1.0 / p_exponent) - 1.0,
        residual_sparse,
        residual_bar,
        norm_bar,
    })
}
