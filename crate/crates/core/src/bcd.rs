//! Two-block coordinate descent on the penalty function.
//!
//! Each sweep minimizes the penalty over `x` with a caller-supplied
//! [`XStep`], then over `y` in closed form. The penalty value is
//! non-increasing along the sweeps; this is checked on every iteration.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::vector;
use crate::model::{eval_penalty, penalty_value_and_grad, projected_gradient_residual, ProblemOracle, SparsityProblem};
use crate::subsolvers::{spg_minimize, SpgConfig};

/// Result of one `x`-subproblem solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct XStepInfo {
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizer of the penalty over `x` for fixed `y` and `rho`.
pub trait XStep<O> {
    /// Overwrites `x` (the warm start) with an approximate minimizer.
    /// `tol` is a hint for iterative solvers.
    fn solve(&mut self, problem: &SparsityProblem<O>, x: &mut [f64], y: &[f64], rho: f64, tol: f64) -> Result<XStepInfo>;

    /// Whether [`XStep::solve`] returns an exact minimizer (up to rounding).
    fn is_exact(&self) -> bool;
}

/// Which stopping tests are active. BCD stops as soon as any active test
/// holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcdCriteria {
    /// `||P(x - grad_x q(x, y)) - x|| <= residual_tol`
    pub residual: bool,
    /// Relative sup-norm change of `x` and `y` at most `relative_change_tol`.
    pub iterate_change: bool,
    /// `|q_l - q_{l-1}| / max(|q_{l-1}|, 1) <= objective_change_tol`
    pub objective_change: bool,
    /// The change-based tests only count once the residual test holds too.
    pub residual_gate: bool,
}

impl BcdCriteria {
    pub const RESIDUAL: Self =
        Self { residual: true, iterate_change: false, objective_change: false, residual_gate: false };
    pub const ITERATE_CHANGE: Self =
        Self { residual: false, iterate_change: true, objective_change: false, residual_gate: false };
    pub const OBJECTIVE_CHANGE: Self =
        Self { residual: false, iterate_change: false, objective_change: true, residual_gate: false };

    pub fn any(&self) -> bool {
        self.residual || self.iterate_change || self.objective_change
    }

    /// The same tests, gated by the residual test.
    pub fn gated(self) -> Self {
        Self { residual_gate: true, ..self }
    }

    fn uses_residual(&self) -> bool {
        self.residual || self.residual_gate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdConfig {
    pub residual_tol: f64,
    pub relative_change_tol: f64,
    pub objective_change_tol: f64,
    pub max_inner_iters: usize,
    pub criteria: BcdCriteria,
    /// Tolerance hint passed to iterative `x`-steps. When the residual test
    /// is in use the hint is capped at `residual_tol / 10`.
    pub x_step_tol: f64,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-6,
            relative_change_tol: 1e-4,
            objective_change_tol: 1e-4,
            max_inner_iters: 500,
            criteria: BcdCriteria::RESIDUAL,
            x_step_tol: 1e-4,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.criteria.any() {
            return Err(Error::invalid("at least one BCD stopping test must be active"));
        }
        let tols = [self.residual_tol, self.relative_change_tol, self.objective_change_tol, self.x_step_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid("BCD tolerances must be positive"));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::invalid("BCD needs at least one iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Residual,
    IterateChange,
    ObjectiveChange,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdTrace {
    /// Penalty value at the start and after every sweep.
    pub penalty_values: Vec<f64>,
    pub iterations: usize,
    pub terminated_by: Termination,
    /// Total iterations reported by the `x`-step.
    pub x_step_iterations: usize,
    /// Largest observed increase of the penalty within a sweep (zero when
    /// monotone).
    pub max_increase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdOutcome {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    pub trace: BcdTrace,
}

impl BcdOutcome {
    pub fn converged(&self) -> bool {
        self.trace.terminated_by != Termination::MaxIterations
    }
}

fn monotone_slack(value: f64, exact: bool) -> f64 {
    let rel = if exact { 1e-12 } else { 1e-8 };
    rel * (1.0 + value.abs())
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    vector::dist_inf(new, old) / vector::norm_inf(new).max(1.0)
}

/// Runs BCD on the penalty at `rho` from `(x0, y0)`.
///
/// `x0` only seeds the first `x`-step. `y0` must be admissible.
pub fn bcd_solve<O, S>(
    problem: &SparsityProblem<O>,
    x_step: &mut S,
    x0: &[f64],
    y0: &[f64],
    rho: f64,
    config: &BcdConfig,
) -> Result<BcdOutcome>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    config.validate()?;
    if !problem.structure().admits(y0) {
        return Err(Error::invalid("BCD start y0 is not admissible"));
    }
    let exact = x_step.is_exact();
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut value = eval_penalty(problem, &x, &y, rho)?.total;
    let mut penalty_values = alloc::vec![value];
    let mut x_prev = x.clone();
    let mut y_prev = y.clone();
    let mut target = alloc::vec![0.0; y.len()];
    let mut x_step_iterations = 0;
    let mut max_increase: f64 = 0.0;
    let mut terminated_by = Termination::MaxIterations;
    let mut iterations = 0;
    let x_tol = if config.criteria.uses_residual() {
        config.x_step_tol.min(0.1 * config.residual_tol)
    } else {
        config.x_step_tol
    };

    while iterations < config.max_inner_iters {
        iterations += 1;
        x_prev.copy_from_slice(&x);
        y_prev.copy_from_slice(&y);

        let info = x_step
            .solve(problem, &mut x, &y, rho, x_tol)
            .map_err(|e| e.context(alloc::format!("x-step in BCD iteration {iterations}")))?;
        x_step_iterations += info.iterations;
        let mid = eval_penalty(problem, &x, &y, rho)?.total;

        for (t, &j) in target.iter_mut().zip(problem.index_set()) {
            *t = x[j];
        }
        problem.structure().y_step(&target, rho, &mut y);
        let new_value = eval_penalty(problem, &x, &y, rho)?.total;

        let inc = (mid - value).max(new_value - mid);
        max_increase = max_increase.max(inc);
        if mid > value + monotone_slack(value, exact) || new_value > mid + monotone_slack(mid, true) {
            return Err(Error::Internal(alloc::format!(
                "penalty increased in BCD iteration {iterations}: {value} -> {mid} -> {new_value}"
            )));
        }
        let previous = value;
        value = new_value;
        penalty_values.push(value);

        let c = &config.criteria;
        let residual_ok =
            c.uses_residual() && projected_gradient_residual(problem, &x, &y, rho)? <= config.residual_tol;
        if c.residual && residual_ok {
            terminated_by = Termination::Residual;
            break;
        }
        if c.residual_gate && !residual_ok {
            continue;
        }
        if c.iterate_change
            && relative_change(&x, &x_prev).max(relative_change(&y, &y_prev)) <= config.relative_change_tol
        {
            terminated_by = Termination::IterateChange;
            break;
        }
        if c.objective_change && (value - previous).abs() / previous.abs().max(1.0) <= config.objective_change_tol {
            terminated_by = Termination::ObjectiveChange;
            break;
        }
    }

    Ok(BcdOutcome {
        x,
        y,
        value,
        trace: BcdTrace { penalty_values, iterations, terminated_by, x_step_iterations, max_increase },
    })
}

/// Parameters of the support-perturbation restart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartConfig {
    /// Minimum relative decrease `(q_old - q_new) / max(|q_old|, 1)` to
    /// accept a restart.
    pub gain: f64,
    pub max_restarts: usize,
}

impl Default for RestartConfig {
    fn default() -> Self {
        Self { gain: 1e-2, max_restarts: 3 }
    }
}

/// Restarts BCD from the incumbent `y` with its smallest nonzero removed,
/// adopting the result while it lowers the penalty by the required margin.
///
/// Returns the incumbent when `||y||_0 <= 1` or no restart improves it.
pub fn perturbation_restart<O, S>(
    problem: &SparsityProblem<O>,
    x_step: &mut S,
    incumbent: BcdOutcome,
    rho: f64,
    config: &BcdConfig,
    restart: &RestartConfig,
) -> Result<BcdOutcome>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    let mut best = incumbent;
    for _ in 0..restart.max_restarts {
        let Some(y0) = problem.structure().drop_smallest(&best.y) else {
            break;
        };
        if !problem.structure().admits(&y0) {
            break;
        }
        let candidate = match bcd_solve(problem, x_step, &best.x, &y0, rho, config) {
            Ok(c) => c,
            Err(_) => break,
        };
        if best.value - candidate.value >= restart.gain * best.value.abs().max(1.0) {
            best = candidate;
        } else {
            break;
        }
    }
    Ok(best)
}

/// Spectral projected gradient on the smooth penalty, projecting with the
/// oracle. The tolerance hint replaces [`SpgConfig::tol`].
#[derive(Debug, Clone, Default)]
pub struct SpgXStep {
    pub config: SpgConfig,
}

impl<O: ProblemOracle> XStep<O> for SpgXStep {
    fn solve(&mut self, problem: &SparsityProblem<O>, x: &mut [f64], y: &[f64], rho: f64, tol: f64) -> Result<XStepInfo> {
        let config = SpgConfig { tol, ..self.config.clone() };
        let objective = |z: &[f64], g: &mut [f64]| penalty_value_and_grad(problem, z, y, rho, g).unwrap_or(f64::NAN);
        let out = spg_minimize(objective, |z: &mut [f64]| problem.oracle().project(z), x, &config)?;
        x.copy_from_slice(&out.x);
        Ok(XStepInfo { iterations: out.iterations, converged: out.converged })
    }

    fn is_exact(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::Quadratic;
    use crate::model::SparsityMode;

    /// Exact x-step for `f = (s/2)||x - c||^2` on `R^n` (no constraints):
    /// `x_j = (s c_j + rho y_j) / (s + rho)` on `J`.
    struct QuadStep;

    impl XStep<Quadratic> for QuadStep {
        fn solve(&mut self, p: &SparsityProblem<Quadratic>, x: &mut [f64], y: &[f64], rho: f64, _tol: f64) -> Result<XStepInfo> {
            let o = p.oracle();
            x.copy_from_slice(&o.center);
            for (&j, yi) in p.index_set().iter().zip(y) {
                x[j] = (o.scale * o.center[j] + rho * yi) / (o.scale + rho);
            }
            Ok(XStepInfo { iterations: 1, converged: true })
        }
        fn is_exact(&self) -> bool {
            true
        }
    }

    #[test]
    fn single_coordinate_forced_to_zero() {
        let p = SparsityProblem::new(Quadratic::new(vec![2.0]), vec![0], SparsityMode::Cardinality(0), vec![0.0]).unwrap();
        let cfg = BcdConfig { residual_tol: 1e-12, ..BcdConfig::default() };
        let out = bcd_solve(&p, &mut QuadStep, &[0.0], &[0.0], 1.0, &cfg).unwrap();
        assert_eq!(out.x, vec![1.0]);
        assert_eq!(out.y, vec![0.0]);
        assert_eq!(out.trace.iterations, 1);
        assert_eq!(out.trace.terminated_by, Termination::Residual);
    }

    #[test]
    fn optimal_start_stops_at_once() {
        let p = SparsityProblem::new(Quadratic::new(vec![2.0, 0.0]), vec![0, 1], SparsityMode::Cardinality(1), vec![0.0; 2])
            .unwrap();
        let out = bcd_solve(&p, &mut QuadStep, &[2.0, 0.0], &[2.0, 0.0], 5.0, &BcdConfig::default()).unwrap();
        assert_eq!(out.trace.iterations, 1);
        assert_eq!(out.trace.terminated_by, Termination::Residual);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn values_are_monotone() {
        let c = vec![3.0, -1.0, 0.5, 2.0, -2.5];
        let p = SparsityProblem::new(Quadratic::new(c), vec![0, 1, 2, 3, 4], SparsityMode::Cardinality(2), vec![0.0; 5])
            .unwrap();
        let cfg = BcdConfig { residual_tol: 1e-10, ..BcdConfig::default() };
        let out = bcd_solve(&p, &mut QuadStep, &[0.0; 5], &[0.0, 0.0, 1.0, 0.0, 0.0], 0.5, &cfg).unwrap();
        for w in out.trace.penalty_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        }
        assert_eq!(out.y.iter().filter(|v| **v != 0.0).count(), 2);
        assert!(out.y[0] != 0.0 && out.y[4] != 0.0);
    }

    #[test]
    fn inadmissible_start_is_rejected() {
        let p = SparsityProblem::new(Quadratic::new(vec![1.0, 1.0]), vec![0, 1], SparsityMode::Cardinality(1), vec![0.0; 2])
            .unwrap();
        assert!(bcd_solve(&p, &mut QuadStep, &[0.0; 2], &[1.0, 1.0], 1.0, &BcdConfig::default()).is_err());
        let cfg = BcdConfig { criteria: BcdCriteria { residual: false, iterate_change: false, objective_change: false, residual_gate: true }, ..BcdConfig::default() };
        assert!(bcd_solve(&p, &mut QuadStep, &[0.0; 2], &[0.0; 2], 1.0, &cfg).is_err());
    }

    #[test]
    fn restart_skipped_for_single_nonzero() {
        let p = SparsityProblem::new(Quadratic::new(vec![2.0, 0.0]), vec![0, 1], SparsityMode::Cardinality(1), vec![0.0; 2])
            .unwrap();
        let out = bcd_solve(&p, &mut QuadStep, &[0.0; 2], &[0.0; 2], 1.0, &BcdConfig::default()).unwrap();
        let again = perturbation_restart(&p, &mut QuadStep, out.clone(), 1.0, &BcdConfig::default(), &RestartConfig::default()).unwrap();
        assert_eq!(again, out);
    }
}
