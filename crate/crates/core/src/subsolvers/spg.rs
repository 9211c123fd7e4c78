use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::vector;

/// Nonmonotone spectral projected gradient parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SpgConfig {
    /// Length of the nonmonotone window.
    pub memory: usize,
    /// Stop when `||P(x - grad F) - x|| / max(|F|, 1) <= tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Sufficient-decrease parameter.
    pub gamma: f64,
    /// Step reduction factor in the backtracking search.
    pub backtrack: f64,
    /// Keep the accepted objective values in [`SpgOutcome::values`].
    pub record_values: bool,
}

impl Default for SpgConfig {
    fn default() -> Self {
        Self {
            memory: 2,
            tol: 1e-4,
            max_iters: 5000,
            alpha_min: 1e-10,
            alpha_max: 1e10,
            gamma: 1e-4,
            backtrack: 0.5,
            record_values: false,
        }
    }
}

impl SpgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::invalid("SPG memory must be at least 1"));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < self.alpha_max) {
            return Err(Error::invalid("SPG step bounds must satisfy 0 < alpha_min < alpha_max"));
        }
        if !(self.tol > 0.0) || !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid("SPG tolerance and gamma must be positive (gamma < 1)"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::invalid("SPG backtracking factor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// `||P(x - grad F) - x||` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at every accepted iterate, starting with `x0`; filled only
    /// when requested.
    pub values: Vec<f64>,
}

/// Minimizes a smooth `F` over a closed convex set given by its projection.
///
/// `objective(x, grad)` returns `F(x)` and writes its gradient; `project`
/// maps a point onto the set in place. The starting point is projected
/// first. At the iteration cap the best iterate is returned with
/// `converged == false`.
pub fn spg_minimize<F, P>(mut objective: F, mut project: P, x0: &[f64], config: &SpgConfig) -> Result<SpgOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
    P: FnMut(&mut [f64]) -> Result<()>,
{
    config.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x)?;
    let mut g = vec![0.0; n];
    let mut fx = objective(&x, &mut g);
    if !fx.is_finite() || !vector::all_finite(&g) {
        return Err(Error::numeric("SPG: objective or gradient not finite at the starting point"));
    }

    let mut values = Vec::new();
    if config.record_values {
        values.push(fx);
    }
    let mut window: Vec<f64> = vec![fx];
    let mut trial = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    let pg_residual = |x: &[f64], g: &[f64], work: &mut [f64], project: &mut P| -> Result<f64> {
        for ((w, xi), gi) in work.iter_mut().zip(x).zip(g) {
            *w = xi - gi;
        }
        project(work)?;
        Ok(vector::dist2(work, x))
    };

    let mut residual = pg_residual(&x, &g, &mut trial, &mut project)?;
    let mut alpha = {
        let inf = vector::dist_inf(&trial, &x);
        if inf > 0.0 {
            (1.0 / inf).clamp(config.alpha_min, config.alpha_max)
        } else {
            1.0
        }
    };

    let mut iterations = 0;
    loop {
        if residual / fx.abs().max(1.0) <= config.tol {
            return Ok(SpgOutcome { x, value: fx, residual, iterations, converged: true, values });
        }
        if iterations >= config.max_iters {
            return Ok(SpgOutcome { x, value: fx, residual, iterations, converged: false, values });
        }
        iterations += 1;

        for ((t, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
            *t = xi - alpha * gi;
        }
        project(&mut trial)?;
        for ((di, ti), xi) in d.iter_mut().zip(&trial).zip(&x) {
            *di = ti - xi;
        }
        let gtd = vector::dot(&g, &d);
        let f_ref = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            for ((t, xi), di) in trial.iter_mut().zip(&x).zip(&d) {
                *t = xi + lambda * di;
            }
            let ft = objective(&trial, &mut g_new);
            if ft.is_finite() && ft <= f_ref + config.gamma * lambda * gtd {
                accepted = Some(ft);
                break;
            }
            lambda *= config.backtrack;
        }
        let Some(f_trial) = accepted else {
            // no acceptable step along a (numerically) zero direction
            return Ok(SpgOutcome { x, value: fx, residual, iterations, converged: false, values });
        };
        if !vector::all_finite(&g_new) {
            return Err(Error::numeric("SPG: gradient not finite"));
        }

        // spectral step from s = x+ - x, y = g+ - g
        let mut sts = 0.0;
        let mut sty = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            sts += s * s;
            sty += s * (g_new[i] - g[i]);
        }
        alpha = if sty <= 0.0 { config.alpha_max } else { (sts / sty).clamp(config.alpha_min, config.alpha_max) };

        core::mem::swap(&mut x, &mut trial);
        core::mem::swap(&mut g, &mut g_new);
        fx = f_trial;
        if config.record_values {
            values.push(fx);
        }
        if window.len() == config.memory {
            window.remove(0);
        }
        window.push(fx);
        residual = pg_residual(&x, &g, &mut trial, &mut project)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(lo: f64, hi: f64) -> impl FnMut(&mut [f64]) -> Result<()> {
        move |x: &mut [f64]| {
            for v in x {
                *v = v.clamp(lo, hi);
            }
            Ok(())
        }
    }

    fn free(_: &mut [f64]) -> Result<()> {
        Ok(())
    }

    #[test]
    fn box_constrained_quadratic() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 2.0);
            g[1] = 2.0 * (x[1] - 2.0);
            (x[0] - 2.0).powi(2) + (x[1] - 2.0).powi(2)
        };
        let cfg = SpgConfig { tol: 1e-10, ..SpgConfig::default() };
        let out = spg_minimize(f, boxed(0.0, 1.0), &[0.0, 0.0], &cfg).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn scalar_quadratic() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            (x[0] - 3.0).powi(2)
        };
        let cfg = SpgConfig { tol: 1e-12, ..SpgConfig::default() };
        let out = spg_minimize(f, free, &[0.0], &cfg).unwrap();
        assert!((out.x[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn logistic_plus_ridge_matches_bisection() {
        // F(t) = log(1 + exp(-t)) + t^2 / 2, F'(t) = -1 / (1 + e^t) + t
        let dfdt = |t: f64| -1.0 / (1.0 + t.exp()) + t;
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = dfdt(x[0]);
            (1.0 + (-x[0]).exp()).ln() + 0.5 * x[0] * x[0]
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dfdt(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let cfg = SpgConfig { tol: 1e-8, ..SpgConfig::default() };
        let out = spg_minimize(f, free, &[5.0], &cfg).unwrap();
        assert!((out.x[0] - 0.5 * (lo + hi)).abs() < 1e-4);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0].sinh();
            x[0].cosh()
        };
        let cfg = SpgConfig { tol: 1e-300, max_iters: 3, ..SpgConfig::default() };
        let out = spg_minimize(f, free, &[2.5], &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let f = |_: &[f64], g: &mut [f64]| {
            g[0] = 0.0;
            f64::NAN
        };
        assert!(matches!(spg_minimize(f, free, &[0.0], &SpgConfig::default()), Err(Error::Numeric(_))));
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SpgConfig { memory: 0, ..SpgConfig::default() };
        let f = |_: &[f64], g: &mut [f64]| {
            g[0] = 0.0;
            0.0
        };
        assert!(spg_minimize(f, free, &[0.0], &cfg).is_err());
    }
}
