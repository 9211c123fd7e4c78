use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::vector;

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    /// `||Q x - rhs||` (recursively updated).
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradient for `Q x = rhs` with `Q` symmetric positive definite,
/// given through `apply(v, out)` writing `out = Q v`.
///
/// Stops when `||Q x - rhs|| <= tol (1 + ||rhs||)`. A direction with
/// non-positive curvature is reported as [`Error::NotPositiveDefinite`].
pub fn cg_solve<Q>(mut apply: Q, rhs: &[f64], x0: &[f64], tol: f64, max_iters: usize) -> Result<CgOutcome>
where
    Q: FnMut(&[f64], &mut [f64]),
{
    let n = rhs.len();
    if x0.len() != n {
        return Err(Error::invalid(alloc::format!("CG start has length {}, expected {n}", x0.len())));
    }
    let mut x = x0.to_vec();
    let mut q = vec![0.0; n];
    apply(&x, &mut q);
    let mut r: Vec<f64> = rhs.iter().zip(&q).map(|(b, v)| b - v).collect();
    let mut p = r.clone();
    let mut rr = vector::norm_sq(&r);
    let target = tol * (1.0 + vector::norm2(rhs));
    let mut iterations = 0;
    while crate::math::sqrt(rr) > target {
        if iterations >= max_iters {
            return Ok(CgOutcome { x, residual: crate::math::sqrt(rr), iterations, converged: false });
        }
        apply(&p, &mut q);
        let curvature = vector::dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite { row: iterations, pivot: curvature });
        }
        let alpha = rr / curvature;
        vector::axpy(alpha, &p, &mut x);
        vector::axpy(-alpha, &q, &mut r);
        let rr_new = vector::norm_sq(&r);
        if !rr_new.is_finite() {
            return Err(Error::numeric("CG residual is not finite"));
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        iterations += 1;
    }
    Ok(CgOutcome { x, residual: crate::math::sqrt(rr), iterations, converged: true })
}
