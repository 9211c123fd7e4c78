use alloc::vec;
use alloc::vec::Vec;

use crate::apps::cs::CsInstance;
use crate::error::{Error, Result};
use crate::linalg::{vector, DenseMatrix};
use crate::math;
use crate::threshold::hard_threshold_top_r;

/// Power iteration estimate of `||A^T A||_2` from the all-ones start.
pub fn gram_norm_estimate(a: &DenseMatrix, iterations: usize) -> f64 {
    let p = a.cols();
    let mut v = vec![1.0 / math::sqrt(p as f64); p];
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        let w = a.t_mul_vec(&a.mul_vec(&v));
        let norm = vector::norm2(&w);
        if norm == 0.0 {
            return 0.0;
        }
        est = norm;
        v = w;
        vector::scale(1.0 / norm, &mut v);
    }
    est
}

/// `0.9 / ||A^T A||_2` with the norm from 50 power iterations.
pub fn default_iht_step(a: &DenseMatrix) -> f64 {
    0.9 / gram_norm_estimate(a, 50)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IhtOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||A x - b||^2 / 2` at the start and after every iteration.
    pub objective_values: Vec<f64>,
}

/// Iterative hard thresholding `x <- H_r(x - step A^T (A x - b))`.
///
/// Stops when `||x+ - x||_inf <= tol max(||x+||_inf, 1)`.
pub fn iht_baseline(
    instance: &CsInstance,
    r: usize,
    step: f64,
    max_iters: usize,
    tol: f64,
    x0: Option<&[f64]>,
) -> Result<IhtOutcome> {
    let p = instance.p();
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(alloc::format!("IHT step must be positive, got {step}")));
    }
    let mut x = match x0 {
        Some(v) if v.len() == p => hard_threshold_top_r(v, r, &[]),
        Some(_) => return Err(Error::invalid("IHT start has the wrong length")),
        None => vec![0.0; p],
    };
    let objective = |x: &[f64]| 0.5 * instance.residual(x) * instance.residual(x);
    let mut objective_values = vec![objective(&x)];
    let mut g = vec![0.0; p];
    for it in 1..=max_iters {
        let mut res = instance.a.mul_vec(&x);
        for (ri, bi) in res.iter_mut().zip(&instance.b) {
            *ri -= bi;
        }
        instance.a.t_mul_vec_into(&res, &mut g);
        let mut z = x.clone();
        vector::axpy(-step, &g, &mut z);
        let next = hard_threshold_top_r(&z, r, &[]);
        let change = vector::dist_inf(&next, &x) / vector::norm_inf(&next).max(1.0);
        x = next;
        objective_values.push(objective(&x));
        if change <= tol {
            return Ok(IhtOutcome { x, iterations: it, converged: true, objective_values });
        }
    }
    Ok(IhtOutcome { x, iterations: max_iters, converged: false, objective_values })
}
