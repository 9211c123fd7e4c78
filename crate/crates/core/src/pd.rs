//! The outer penalty loop.
//!
//! Outer iteration `k` runs BCD on the penalty with `rho_k = rho_0 sigma^k`
//! to tolerance `eps_k`, then increases the penalty. Before the next
//! iteration the copy `y` is reset to `(x_feas)_J` whenever the minimum of
//! the next penalty over `x` exceeds the level `Upsilon`, which keeps the
//! iterates in a bounded level set.

use alloc::vec;
use alloc::vec::Vec;

use crate::bcd::{bcd_solve, perturbation_restart, BcdConfig, RestartConfig, Termination, XStep};
use crate::error::{Error, Result};
use crate::linalg::vector;
use crate::model::{
    eval_penalty, is_feasible, kkt_residual_with_support, projected_gradient_residual, FeasibilityReport, KktReport,
    ProblemOracle, SparsityMode, SparsityProblem,
};
use crate::math;

/// `eps_k = max(initial * factor^k, floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsSchedule {
    pub initial: f64,
    pub factor: f64,
    pub floor: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self { initial: 1e-1, factor: 0.5, floor: 1e-8 }
    }
}

impl EpsSchedule {
    pub fn at(&self, k: usize) -> f64 {
        (self.initial * math::powi(self.factor, k as i32)).max(self.floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterCriterion {
    /// `||x_J - y||_inf <= eps_O`
    Absolute,
    /// `||x_J - y||_inf / max(|penalty|, 1) <= eps_O`
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdConfig {
    pub rho0: f64,
    pub sigma: f64,
    pub eps_schedule: EpsSchedule,
    pub outer_tol: f64,
    pub outer_criterion: OuterCriterion,
    pub max_outer_iters: usize,
    /// Inner settings; `residual_tol` is replaced by `eps_k` in outer
    /// iteration `k`.
    pub bcd: BcdConfig,
    pub upsilon_margin: f64,
    /// Support-perturbation restarts after each BCD run.
    pub restart: Option<RestartConfig>,
}

impl Default for PdConfig {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            sigma: 10.0,
            eps_schedule: EpsSchedule::default(),
            outer_tol: 1e-4,
            outer_criterion: OuterCriterion::Absolute,
            max_outer_iters: 60,
            bcd: BcdConfig::default(),
            upsilon_margin: 0.0,
            restart: None,
        }
    }
}

impl PdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(Error::invalid(alloc::format!("initial penalty must be positive, got {}", self.rho0)));
        }
        if !(self.sigma > 1.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(alloc::format!("penalty growth factor must exceed 1, got {}", self.sigma)));
        }
        let e = &self.eps_schedule;
        if !(e.initial > 0.0 && e.factor > 0.0 && e.factor < 1.0 && e.floor > 0.0) {
            return Err(Error::invalid("tolerance schedule must be positive and decreasing"));
        }
        if !(self.outer_tol > 0.0) {
            return Err(Error::invalid("outer tolerance must be positive"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::invalid("at least one outer iteration is required"));
        }
        if !(self.upsilon_margin >= 0.0) {
            return Err(Error::invalid("Upsilon margin must be nonnegative"));
        }
        self.bcd.validate()
    }

    /// `rho_0 sigma^k`
    pub fn rho_at(&self, k: usize) -> f64 {
        self.rho0 * math::powi(self.sigma, k as i32)
    }
}

/// Optional starting point. Missing parts default to the feasible point and
/// its restriction to `J`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PdStart {
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub rho: f64,
    pub eps: f64,
    pub penalty: f64,
    /// `||x_J - y||_inf`
    pub gap: f64,
    /// `||P(x - grad_x q(x, y)) - x||`
    pub residual: f64,
    /// Whether `y` was reset to `(x_feas)_J` before this iteration.
    pub safeguard_triggered: bool,
    pub inner_iterations: usize,
    pub terminated_by: Termination,
    /// Largest sweep-to-sweep penalty increase, relative to `1 + |q|`.
    pub max_increase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub varpi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub multipliers: Multipliers,
    pub outer_iterations: usize,
    pub final_rho: f64,
    pub final_eps: f64,
    /// Outer test met and the final inner solve met its own stopping test.
    pub converged: bool,
    /// Outer test met, whatever the final inner solve did.
    pub outer_test_met: bool,
    pub upsilon: f64,
    pub history: Vec<OuterRecord>,
    pub feasibility: FeasibilityReport,
    pub kkt: KktReport,
    /// Sum of BCD sweeps over all outer iterations.
    pub inner_iterations: usize,
    /// Filled by callers that can read a clock.
    pub wall_time_ms: Option<f64>,
}

/// `Upsilon` and the approximate minimizer used to compute it.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsilonEstimate {
    pub upsilon: f64,
    pub x_min: Vec<f64>,
    pub min_penalty: f64,
}

/// `max(f(x_feas) [+ nu ||(x_feas)_J||_0], min_x penalty(x, y0; rho0)) + margin`,
/// with the minimum approximated by one `x`-step from `x_warm`.
pub fn compute_upsilon<O, S>(
    problem: &SparsityProblem<O>,
    x_step: &mut S,
    x_warm: &[f64],
    y0: &[f64],
    rho0: f64,
    margin: f64,
    tol: f64,
) -> Result<UpsilonEstimate>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    let xf = problem.feasible_point();
    let feas_value = problem.oracle().objective_value(xf) + problem.l0_term(&problem.restrict(xf));
    let mut x_min = x_warm.to_vec();
    x_step.solve(problem, &mut x_min, y0, rho0, tol).map_err(|e| e.context("x-step for Upsilon"))?;
    let min_penalty = eval_penalty(problem, &x_min, y0, rho0)?.total;
    Ok(UpsilonEstimate { upsilon: feas_value.max(min_penalty) + margin, x_min, min_penalty })
}

/// Decision of the level-set safeguard together with the approximate
/// minimizer it computed (a warm start for the next BCD run).
#[derive(Debug, Clone, PartialEq)]
pub struct SafeguardOutcome {
    pub y0: Vec<f64>,
    pub triggered: bool,
    pub x_min: Vec<f64>,
    pub min_penalty: f64,
}

/// Returns `(x_feas)_J` when `min_x penalty(x, y_prev; rho_next) > upsilon`,
/// else `y_prev`.
#[allow(clippy::too_many_arguments)]
pub fn feasibility_safeguard<O, S>(
    problem: &SparsityProblem<O>,
    x_step: &mut S,
    x_warm: &[f64],
    y_prev: &[f64],
    rho_next: f64,
    upsilon: f64,
    tol: f64,
) -> Result<SafeguardOutcome>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    let mut x_min = x_warm.to_vec();
    x_step.solve(problem, &mut x_min, y_prev, rho_next, tol).map_err(|e| e.context("x-step for safeguard"))?;
    let min_penalty = eval_penalty(problem, &x_min, y_prev, rho_next)?.total;
    let triggered = min_penalty > upsilon;
    let y0 = if triggered { problem.restrict(problem.feasible_point()) } else { y_prev.to_vec() };
    Ok(SafeguardOutcome { y0, triggered, x_min, min_penalty })
}

/// `lambda = rho [g(x)]^+`, `mu = rho h(x)`, `varpi = rho (x_J - y)`.
pub fn extract_multipliers<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], y: &[f64], rho: f64) -> Multipliers {
    let o = problem.oracle();
    let mut lambda = vec![0.0; o.num_inequalities()];
    o.inequalities(x, &mut lambda);
    for l in lambda.iter_mut() {
        *l = if *l > 0.0 { rho * *l } else { 0.0 };
    }
    let mut mu = vec![0.0; o.num_equalities()];
    o.equalities(x, &mut mu);
    vector::scale(rho, &mut mu);
    let varpi = problem.index_set().iter().zip(y).map(|(&j, yi)| rho * (x[j] - yi)).collect();
    Multipliers { lambda, mu, varpi }
}

/// PD for the cardinality-constrained form.
pub fn pd_solve_constrained<O, S>(
    problem: &SparsityProblem<O>,
    x_step: &mut S,
    config: &PdConfig,
    start: &PdStart,
) -> Result<SolveReport>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    if !matches!(problem.mode(), SparsityMode::Cardinality(_)) {
        return Err(Error::invalid("pd_solve_constrained needs a cardinality-constrained problem"));
    }
    pd_solve(problem, x_step, config, start)
}

/// PD for the l0-regularized form.
pub fn pd_solve_regularized<O, S>(
    problem: &SparsityProblem<O>,
    x_step: &mut S,
    config: &PdConfig,
    start: &PdStart,
) -> Result<SolveReport>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    if !matches!(problem.mode(), SparsityMode::Regularized(_)) {
        return Err(Error::invalid("pd_solve_regularized needs an l0-regularized problem"));
    }
    pd_solve(problem, x_step, config, start)
}

fn relative_increase(values: &[f64]) -> f64 {
    values.windows(2).fold(0.0, |m, w| m.max((w[1] - w[0]) / (1.0 + w[0].abs())))
}

fn pd_solve<O, S>(problem: &SparsityProblem<O>, x_step: &mut S, config: &PdConfig, start: &PdStart) -> Result<SolveReport>
where
    O: ProblemOracle,
    S: XStep<O> + ?Sized,
{
    config.validate()?;
    let n = problem.oracle().dim();
    let mut x = start.x0.clone().unwrap_or_else(|| problem.feasible_point().to_vec());
    let mut y = start.y0.clone().unwrap_or_else(|| problem.restrict(problem.feasible_point()));
    if x.len() != n || y.len() != problem.index_set().len() {
        return Err(Error::invalid("starting point has the wrong dimension"));
    }
    if !problem.structure().admits(&y) {
        return Err(Error::invalid("starting y is not admissible"));
    }

    let tol0 = config.bcd.x_step_tol;
    let up = compute_upsilon(problem, x_step, &x, &y, config.rho0, config.upsilon_margin, tol0)?;
    let upsilon = up.upsilon;
    x = up.x_min;

    let mut history = Vec::new();
    let mut safeguard_triggered = false;
    let mut converged = false;
    let mut outer_test_met = false;
    let mut inner_iterations = 0;
    let mut k = 0;
    loop {
        let rho = config.rho_at(k);
        let eps = config.eps_schedule.at(k);
        let bcd = BcdConfig { residual_tol: eps, ..config.bcd.clone() };
        let mut out = bcd_solve(problem, x_step, &x, &y, rho, &bcd)
            .map_err(|e| e.context(alloc::format!("outer iteration {k}")))?;
        if let Some(restart) = &config.restart {
            out = perturbation_restart(problem, x_step, out, rho, &bcd, restart)?;
        }
        inner_iterations += out.trace.iterations;
        let inner_converged = out.converged();
        x = out.x;
        y = out.y;

        let gap = problem.index_set().iter().zip(&y).fold(0.0f64, |m, (&j, yi)| m.max((x[j] - yi).abs()));
        let residual = projected_gradient_residual(problem, &x, &y, rho)?;
        history.push(OuterRecord {
            rho,
            eps,
            penalty: out.value,
            gap,
            residual,
            safeguard_triggered,
            inner_iterations: out.trace.iterations,
            terminated_by: out.trace.terminated_by,
            max_increase: relative_increase(&out.trace.penalty_values),
        });
        let measure = match config.outer_criterion {
            OuterCriterion::Absolute => gap,
            OuterCriterion::Scaled => gap / out.value.abs().max(1.0),
        };
        k += 1;
        if measure <= config.outer_tol {
            converged = inner_converged;
            outer_test_met = true;
            break;
        }
        if k >= config.max_outer_iters {
            break;
        }
        let guard = feasibility_safeguard(problem, x_step, &x, &y, config.rho_at(k), upsilon, tol0)?;
        safeguard_triggered = guard.triggered;
        y = guard.y0;
        x = guard.x_min;
    }

    let final_rho = config.rho_at(k - 1);
    let final_eps = config.eps_schedule.at(k - 1);
    let multipliers = extract_multipliers(problem, &x, &y, final_rho);
    let kkt = kkt_residual_with_support(problem, &x, &multipliers.lambda, &multipliers.mu, &multipliers.varpi, &y)?;
    let feasibility = is_feasible(problem, &x, config.outer_tol)?;
    Ok(SolveReport {
        x,
        y,
        multipliers,
        outer_iterations: k,
        final_rho,
        final_eps,
        converged,
        outer_test_met,
        upsilon,
        history,
        feasibility,
        kkt,
        inner_iterations,
        wall_time_ms: None,
    })
}
