//! Problem descriptions, quadratic penalty functions and first-order residuals.
//!
//! A [`SparsityProblem`] couples a smooth model (objective, constraints and
//! the projection onto a closed convex set `X`, all provided by a
//! [`ProblemOracle`]) with a sparse index set `J` and a [`SparseStructure`]
//! describing the set of admissible copies `y` of `x_J`.
//!
//! The penalty of a pair `(x, y)` is
//!
//! ```text
//! f(x) + nu ||y||_0 + (rho / 2) (||[g(x)]^+||^2 + ||h(x)||^2 + ||x_J - y||^2)
//! ```
//!
//! with the `nu` term present only for the regularized form.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::vector;
use crate::threshold;
use crate::SUPPORT_TOL;

/// Smooth data of a problem. Indices are zero based.
pub trait ProblemOracle {
    fn dim(&self) -> usize;

    /// Returns `f(x)` and writes `grad f(x)` into `grad`.
    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// `f(x)` alone. Override when the gradient is expensive.
    fn objective_value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.objective(x, &mut g)
    }

    fn num_inequalities(&self) -> usize {
        0
    }

    /// Writes `g(x)`.
    fn inequalities(&self, _x: &[f64], _out: &mut [f64]) {}

    /// Accumulates `out += g'(x)^T w`.
    fn inequality_jacobian_t(&self, _x: &[f64], _w: &[f64], _out: &mut [f64]) {}

    fn num_equalities(&self) -> usize {
        0
    }

    /// Writes `h(x)`.
    fn equalities(&self, _x: &[f64], _out: &mut [f64]) {}

    /// Accumulates `out += h'(x)^T w`.
    fn equality_jacobian_t(&self, _x: &[f64], _w: &[f64], _out: &mut [f64]) {}

    /// Euclidean projection onto `X`, in place. The default is `X = R^n`.
    fn project(&self, _x: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

impl<T: ProblemOracle + ?Sized> ProblemOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).objective(x, grad)
    }
    fn objective_value(&self, x: &[f64]) -> f64 {
        (**self).objective_value(x)
    }
    fn num_inequalities(&self) -> usize {
        (**self).num_inequalities()
    }
    fn inequalities(&self, x: &[f64], out: &mut [f64]) {
        (**self).inequalities(x, out)
    }
    fn inequality_jacobian_t(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        (**self).inequality_jacobian_t(x, w, out)
    }
    fn num_equalities(&self) -> usize {
        (**self).num_equalities()
    }
    fn equalities(&self, x: &[f64], out: &mut [f64]) {
        (**self).equalities(x, out)
    }
    fn equality_jacobian_t(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        (**self).equality_jacobian_t(x, w, out)
    }
    fn project(&self, x: &mut [f64]) -> Result<()> {
        (**self).project(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsityMode {
    /// `||x_J||_0 <= r`
    Cardinality(usize),
    /// `nu ||x_J||_0` added to the objective.
    Regularized(f64),
}

/// The set of admissible copies `y` of `x_J` and its l0 measure.
pub trait SparseStructure: Send + Sync {
    fn len(&self) -> usize;

    fn mode(&self) -> SparsityMode;

    /// The l0 measure of `y`, counting entries with `|y_i| > tol`.
    fn count(&self, y: &[f64], tol: f64) -> usize;

    /// Exact y-step: writes a global minimizer over the admissible set of
    /// `nu count(y) + (rho / 2) ||target - y||^2` (the `nu` term only in
    /// regularized mode).
    fn y_step(&self, target: &[f64], rho: f64, y: &mut [f64]);

    /// Whether `y` is admissible (exact zeros).
    fn admits(&self, y: &[f64]) -> bool;

    /// A nearest point to `y` with measure `count(y) - 1`, or `None` when
    /// `count(y) <= 1`.
    fn drop_smallest(&self, y: &[f64]) -> Option<Vec<f64>>;

    /// Marks the positions of `y` where the first-order multiplier of the
    /// splitting must vanish: the support of `y` and any positions the
    /// sparsity term does not act on.
    fn multiplier_free(&self, y: &[f64], out: &mut [bool]);
}

/// Coordinatewise sparsity on `y`, with an optional forced-zero mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSparsity {
    mode: SparsityMode,
    forced_zero: Vec<bool>,
    len: usize,
}

impl CoordinateSparsity {
    pub fn new(len: usize, mode: SparsityMode) -> Result<Self> {
        Self::with_forced_zero(len, mode, Vec::new())
    }

    /// `forced_zero` is empty or holds one flag per coordinate.
    pub fn with_forced_zero(len: usize, mode: SparsityMode, forced_zero: Vec<bool>) -> Result<Self> {
        if !forced_zero.is_empty() && forced_zero.len() != len {
            return Err(Error::invalid(alloc::format!(
                "forced-zero mask has length {}, expected {len}",
                forced_zero.len()
            )));
        }
        match mode {
            SparsityMode::Cardinality(r) if r > len => {
                return Err(Error::invalid(alloc::format!("cardinality budget {r} exceeds |J| = {len}")));
            }
            SparsityMode::Regularized(nu) if !(nu >= 0.0 && nu.is_finite()) => {
                return Err(Error::invalid(alloc::format!("l0 weight must be nonnegative, got {nu}")));
            }
            _ => {}
        }
        Ok(Self { mode, forced_zero, len })
    }

    fn forced(&self, i: usize) -> bool {
        self.forced_zero.get(i).copied().unwrap_or(false)
    }
}

impl SparseStructure for CoordinateSparsity {
    fn len(&self) -> usize {
        self.len
    }

    fn mode(&self) -> SparsityMode {
        self.mode
    }

    fn count(&self, y: &[f64], tol: f64) -> usize {
        vector::count_nonzero(y, tol)
    }

    fn y_step(&self, target: &[f64], rho: f64, y: &mut [f64]) {
        match self.mode {
            SparsityMode::Cardinality(r) => threshold::hard_threshold_top_r_into(target, r, &self.forced_zero, y),
            SparsityMode::Regularized(nu) => threshold::hard_threshold_nu_into(target, nu, rho, &self.forced_zero, y),
        }
    }

    fn admits(&self, y: &[f64]) -> bool {
        if y.len() != self.len {
            return false;
        }
        if y.iter().enumerate().any(|(i, v)| *v != 0.0 && self.forced(i)) {
            return false;
        }
        match self.mode {
            SparsityMode::Cardinality(r) => vector::count_nonzero(y, 0.0) <= r,
            SparsityMode::Regularized(_) => true,
        }
    }

    fn drop_smallest(&self, y: &[f64]) -> Option<Vec<f64>> {
        if vector::count_nonzero(y, 0.0) <= 1 {
            return None;
        }
        let mut idx: Option<usize> = None;
        for (i, v) in y.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            match idx {
                Some(j) if y[j].abs() <= v.abs() => {}
                _ => idx = Some(i),
            }
        }
        let mut out = y.to_vec();
        out[idx?] = 0.0;
        Some(out)
    }

    fn multiplier_free(&self, y: &[f64], out: &mut [bool]) {
        for (o, v) in out.iter_mut().zip(y) {
            *o = *v != 0.0;
        }
    }
}

/// A sparse optimization problem in cardinality-constrained or l0-regularized
/// form, with a known feasible point.
pub struct SparsityProblem<O> {
    oracle: O,
    index_set: Vec<usize>,
    structure: Box<dyn SparseStructure>,
    feasible_point: Vec<f64>,
}

impl<O: ProblemOracle> SparsityProblem<O> {
    /// Coordinatewise sparsity on `x_J` with the given mode.
    pub fn new(oracle: O, index_set: Vec<usize>, mode: SparsityMode, feasible_point: Vec<f64>) -> Result<Self> {
        let structure = CoordinateSparsity::new(index_set.len(), mode)?;
        Self::with_structure(oracle, index_set, Box::new(structure), feasible_point)
    }

    pub fn with_structure(
        oracle: O,
        index_set: Vec<usize>,
        structure: Box<dyn SparseStructure>,
        feasible_point: Vec<f64>,
    ) -> Result<Self> {
        let n = oracle.dim();
        if index_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sparse index set must be strictly increasing"));
        }
        if index_set.last().is_some_and(|&j| j >= n) {
            return Err(Error::invalid(alloc::format!("sparse index out of range for dimension {n}")));
        }
        if structure.len() != index_set.len() {
            return Err(Error::invalid(alloc::format!(
                "sparsity structure has length {}, index set has {}",
                structure.len(),
                index_set.len()
            )));
        }
        if feasible_point.len() != n {
            return Err(Error::invalid(alloc::format!(
                "feasible point has length {}, expected {n}",
                feasible_point.len()
            )));
        }
        let problem = Self { oracle, index_set, structure, feasible_point };
        let report = is_feasible(&problem, &problem.feasible_point, 1e-8)?;
        if !report.feasible {
            return Err(Error::InvalidProblem(alloc::format!("feasible point is not feasible: {report:?}")));
        }
        if !problem.structure.admits(&problem.restrict(&problem.feasible_point)) {
            return Err(Error::InvalidProblem("restriction of the feasible point to J is not an admissible y".into()));
        }
        Ok(problem)
    }
}

impl<O> SparsityProblem<O> {
    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn structure(&self) -> &dyn SparseStructure {
        self.structure.as_ref()
    }

    pub fn mode(&self) -> SparsityMode {
        self.structure.mode()
    }

    pub fn feasible_point(&self) -> &[f64] {
        &self.feasible_point
    }

    /// `x_J`
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.index_set.iter().map(|&j| x[j]).collect()
    }

    /// `nu ||y||_0` in regularized mode, zero otherwise.
    pub fn l0_term(&self, y: &[f64]) -> f64 {
        match self.mode() {
            SparsityMode::Regularized(nu) => nu * self.structure.count(y, 0.0) as f64,
            SparsityMode::Cardinality(_) => 0.0,
        }
    }
}

/// Penalty value split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyValue {
    pub total: f64,
    pub objective_part: f64,
    /// `(||[g]^+||^2 + ||h||^2 + ||x_J - y||^2) / 2`, before scaling by `rho`.
    pub infeasibility_part: f64,
    pub l0_part: f64,
}

fn check_pair<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], y: &[f64]) -> Result<()> {
    let n = problem.oracle.dim();
    if x.len() != n {
        return Err(Error::invalid(alloc::format!("x has length {}, expected {n}", x.len())));
    }
    if y.len() != problem.index_set.len() {
        return Err(Error::invalid(alloc::format!(
            "y has length {}, expected |J| = {}",
            y.len(),
            problem.index_set.len()
        )));
    }
    Ok(())
}

/// Penalty for either mode (the l0 term follows the problem's mode).
pub fn eval_penalty<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], y: &[f64], rho: f64) -> Result<PenaltyValue> {
    check_pair(problem, x, y)?;
    if !(rho > 0.0) {
        return Err(Error::invalid("penalty parameter must be positive"));
    }
    let o = &problem.oracle;
    let f = o.objective_value(x);
    let mut infeas = 0.0;
    let m = o.num_inequalities();
    if m > 0 {
        let mut g = vec![0.0; m];
        o.inequalities(x, &mut g);
        infeas += g.iter().map(|v| v.max(0.0) * v.max(0.0)).sum::<f64>();
    }
    let p = o.num_equalities();
    if p > 0 {
        let mut h = vec![0.0; p];
        o.equalities(x, &mut h);
        infeas += vector::norm_sq(&h);
    }
    infeas += problem.index_set.iter().zip(y).map(|(&j, yi)| (x[j] - yi) * (x[j] - yi)).sum::<f64>();
    let infeasibility_part = 0.5 * infeas;
    let l0_part = problem.l0_term(y);
    let total = f + rho * infeasibility_part + l0_part;
    if !total.is_finite() {
        return Err(Error::numeric(alloc::format!("penalty is not finite (objective {f})")));
    }
    Ok(PenaltyValue { total, objective_part: f, infeasibility_part, l0_part })
}

/// `q_rho(x, y) = f(x) + (rho/2)(||[g(x)]^+||^2 + ||h(x)||^2 + ||x_J - y||^2)`.
pub fn eval_q_penalty<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], y: &[f64], rho: f64) -> Result<PenaltyValue> {
    match problem.mode() {
        SparsityMode::Cardinality(_) => eval_penalty(problem, x, y, rho),
        SparsityMode::Regularized(_) => Err(Error::invalid("q penalty needs a cardinality-constrained problem")),
    }
}

/// `p_rho(x, y) = q_rho(x, y) + nu ||y||_0`.
pub fn eval_p_penalty<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], y: &[f64], rho: f64) -> Result<PenaltyValue> {
    match problem.mode() {
        SparsityMode::Regularized(_) => eval_penalty(problem, x, y, rho),
        SparsityMode::Cardinality(_) => Err(Error::invalid("p penalty needs an l0-regularized problem")),
    }
}

/// `grad_x` of the penalty (the l0 term does not depend on `x`).
pub fn grad_x_penalty<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], y: &[f64], rho: f64) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; x.len()];
    penalty_value_and_grad(problem, x, y, rho, &mut grad)?;
    Ok(grad)
}

/// Smooth part of the penalty (everything except the l0 term) and its
/// gradient in `x`.
pub fn penalty_value_and_grad<O: ProblemOracle>(
    problem: &SparsityProblem<O>,
    x: &[f64],
    y: &[f64],
    rho: f64,
    grad: &mut [f64],
) -> Result<f64> {
    check_pair(problem, x, y)?;
    let o = &problem.oracle;
    let mut value = o.objective(x, grad);
    let mut infeas = 0.0;
    let m = o.num_inequalities();
    if m > 0 {
        let mut g = vec![0.0; m];
        o.inequalities(x, &mut g);
        for v in g.iter_mut() {
            *v = v.max(0.0);
            infeas += *v * *v;
            *v *= rho;
        }
        o.inequality_jacobian_t(x, &g, grad);
    }
    let p = o.num_equalities();
    if p > 0 {
        let mut h = vec![0.0; p];
        o.equalities(x, &mut h);
        infeas += vector::norm_sq(&h);
        vector::scale(rho, &mut h);
        o.equality_jacobian_t(x, &h, grad);
    }
    for (&j, yi) in problem.index_set.iter().zip(y) {
        let d = x[j] - yi;
        infeas += d * d;
        grad[j] += rho * d;
    }
    value += 0.5 * rho * infeas;
    if !value.is_finite() || !vector::all_finite(grad) {
        return Err(Error::numeric("penalty or its gradient is not finite"));
    }
    Ok(value)
}

/// `||P_X(x - grad_x q(x, y)) - x||`
pub fn projected_gradient_residual<O: ProblemOracle>(
    problem: &SparsityProblem<O>,
    x: &[f64],
    y: &[f64],
    rho: f64,
) -> Result<f64> {
    let grad = grad_x_penalty(problem, x, y, rho)?;
    let mut step: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - g).collect();
    problem.oracle.project(&mut step)?;
    Ok(vector::dist2(&step, x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `||[g(x)]^+||_inf`
    pub inequality_violation: f64,
    /// `||h(x)||_inf`
    pub equality_violation: f64,
    /// `||P_X(x) - x||`
    pub set_distance: f64,
    /// l0 measure of `x_J` at `max(tol, SUPPORT_TOL)`.
    pub sparsity: usize,
    pub sparsity_ok: bool,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        self.inequality_violation.max(self.equality_violation).max(self.set_distance)
    }
}

/// Checks the constraints at tolerance `tol`. Entries of `x_J` count as
/// nonzero when they exceed `max(tol, SUPPORT_TOL)` in magnitude.
pub fn is_feasible<O: ProblemOracle>(problem: &SparsityProblem<O>, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
    let o = &problem.oracle;
    if x.len() != o.dim() {
        return Err(Error::invalid(alloc::format!("x has length {}, expected {}", x.len(), o.dim())));
    }
    let mut g = vec![0.0; o.num_inequalities()];
    o.inequalities(x, &mut g);
    let inequality_violation = g.iter().fold(0.0f64, |m, v| m.max(v.max(0.0)));
    let mut h = vec![0.0; o.num_equalities()];
    o.equalities(x, &mut h);
    let equality_violation = vector::norm_inf(&h);
    let mut px = x.to_vec();
    o.project(&mut px)?;
    let set_distance = vector::dist2(&px, x);
    let sparsity = problem.structure.count(&problem.restrict(x), tol.max(SUPPORT_TOL));
    let sparsity_ok = match problem.mode() {
        SparsityMode::Cardinality(r) => sparsity <= r,
        SparsityMode::Regularized(_) => true,
    };
    let feasible = inequality_violation <= tol && equality_violation <= tol && set_distance <= tol && sparsity_ok;
    Ok(FeasibilityReport { feasible, inequality_violation, equality_violation, set_distance, sparsity, sparsity_ok })
}

/// First-order residuals of a candidate point and multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `||P_X(x - (grad f + g'^T lambda + h'^T mu + z)) - x||`
    pub stationarity_residual: f64,
    /// `max_i |lambda_i g_i(x)|`
    pub complementarity_residual: f64,
    /// `max(0, -min_i lambda_i)`
    pub sign_violation: f64,
    /// Largest `|varpi_i|` on positions where `z` is forced to zero (the
    /// support and the positions outside the sparsity term); these entries
    /// are dropped when `z` is assembled.
    pub z_support_violation: f64,
    /// `max(||[g]^+||_inf, ||h||_inf, dist(x, X))`
    pub feasibility_residual: f64,
}

/// KKT residuals with the active support taken from `x` itself
/// (`|x_j| > SUPPORT_TOL`).
pub fn kkt_residual<O: ProblemOracle>(
    problem: &SparsityProblem<O>,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    varpi: &[f64],
) -> Result<KktReport> {
    let support: Vec<f64> = problem.restrict(x).into_iter().map(|v| if v.abs() > SUPPORT_TOL { v } else { 0.0 }).collect();
    kkt_residual_with_support(problem, x, lambda, mu, varpi, &support)
}

/// KKT residuals with the active support taken from `reference` (typically
/// the sparse copy `y`). `z_j = varpi_i` for `j = J(i)` outside the support,
/// zero elsewhere.
pub fn kkt_residual_with_support<O: ProblemOracle>(
    problem: &SparsityProblem<O>,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    varpi: &[f64],
    reference: &[f64],
) -> Result<KktReport> {
    let o = &problem.oracle;
    let n = o.dim();
    let (m, p, nj) = (o.num_inequalities(), o.num_equalities(), problem.index_set.len());
    if x.len() != n || lambda.len() != m || mu.len() != p || varpi.len() != nj || reference.len() != nj {
        return Err(Error::invalid(alloc::format!(
            "dimension mismatch: x {}/{n}, lambda {}/{m}, mu {}/{p}, varpi {}/{nj}, support {}/{nj}",
            x.len(),
            lambda.len(),
            mu.len(),
            varpi.len(),
            reference.len()
        )));
    }
    let mut grad = vec![0.0; n];
    o.objective(x, &mut grad);
    if m > 0 {
        o.inequality_jacobian_t(x, lambda, &mut grad);
    }
    if p > 0 {
        o.equality_jacobian_t(x, mu, &mut grad);
    }
    let mut free = vec![false; nj];
    problem.structure.multiplier_free(reference, &mut free);
    let mut z_support_violation: f64 = 0.0;
    for (i, &j) in problem.index_set.iter().enumerate() {
        if free[i] {
            z_support_violation = z_support_violation.max(varpi[i].abs());
        } else {
            grad[j] += varpi[i];
        }
    }
    if !vector::all_finite(&grad) {
        return Err(Error::numeric("non-finite gradient in KKT residual"));
    }
    let mut step: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - g).collect();
    o.project(&mut step)?;
    let stationarity_residual = vector::dist2(&step, x);

    let mut g = vec![0.0; m];
    o.inequalities(x, &mut g);
    let complementarity_residual = lambda.iter().zip(&g).fold(0.0f64, |acc, (l, gi)| acc.max((l * gi).abs()));
    let sign_violation = lambda.iter().fold(0.0f64, |acc, l| acc.max(-l));
    let mut h = vec![0.0; p];
    o.equalities(x, &mut h);
    let mut px = x.to_vec();
    o.project(&mut px)?;
    let feasibility_residual = g
        .iter()
        .fold(0.0f64, |acc, v| acc.max(*v))
        .max(vector::norm_inf(&h))
        .max(vector::dist2(&px, x));
    Ok(KktReport { stationarity_residual, complementarity_residual, sign_violation, z_support_violation, feasibility_residual })
}


#[cfg(test)]
mod tests {
    use super::testing::Quadratic;
    use super::*;

    /// f = 0, g(x) = x_0 - 1.
    struct Zero {
        n: usize,
    }
    impl ProblemOracle for Zero {
        fn dim(&self) -> usize {
            self.n
        }
        fn objective(&self, _x: &[f64], grad: &mut [f64]) -> f64 {
            grad.fill(0.0);
            0.0
        }
        fn num_inequalities(&self) -> usize {
            1
        }
        fn inequalities(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0] - 1.0;
        }
        fn inequality_jacobian_t(&self, _x: &[f64], w: &[f64], out: &mut [f64]) {
            out[0] += w[0];
        }
    }

    #[test]
    fn q_penalty_direct_evaluation() {
        let problem = SparsityProblem::new(Zero { n: 1 }, vec![], SparsityMode::Cardinality(0), vec![0.0]).unwrap();
        let v = eval_q_penalty(&problem, &[2.0], &[], 2.0).unwrap();
        assert_eq!(v.total, 1.0);
        assert_eq!(v.infeasibility_part, 0.5);
        assert!(eval_p_penalty(&problem, &[2.0], &[], 2.0).is_err());
    }

    #[test]
    fn zero_infeasibility_gives_objective() {
        let problem =
            SparsityProblem::new(Quadratic::new(vec![1.0, 2.0]), vec![0, 1], SparsityMode::Cardinality(2), vec![0.0, 0.0])
                .unwrap();
        let x = [0.5, 0.25];
        let v = eval_q_penalty(&problem, &x, &x, 3.0).unwrap();
        assert_eq!(v.total, v.objective_part);
        let g = grad_x_penalty(&problem, &x, &x, 3.0).unwrap();
        assert_eq!(g, vec![-0.5, -1.75]);
        let v2 = eval_q_penalty(&problem, &x, &[0.0, 0.0], 6.0).unwrap();
        let v1 = eval_q_penalty(&problem, &x, &[0.0, 0.0], 3.0).unwrap();
        assert!(((v2.total - v2.objective_part) - 2.0 * (v1.total - v1.objective_part)).abs() < 1e-15);
    }

    #[test]
    fn p_penalty_counts_nonzeros() {
        let problem = SparsityProblem::new(Zero { n: 3 }, vec![0, 1, 2], SparsityMode::Regularized(3.0), vec![0.0; 3])
            .unwrap();
        let v = eval_p_penalty(&problem, &[1.0, 0.0, 2.0], &[1.0, 0.0, 2.0], 1.0).unwrap();
        assert_eq!(v.l0_part, 6.0);
        // f = 0, J = {0}, x = 1, y = 0, nu = 1, rho = 4 -> 2
        let p1 = SparsityProblem::new(
            Quadratic { center: vec![0.0], scale: 0.0, ineq_bound: None, lower: None },
            vec![0],
            SparsityMode::Regularized(1.0),
            vec![0.0],
        )
        .unwrap();
        assert_eq!(eval_p_penalty(&p1, &[1.0], &[0.0], 4.0).unwrap().total, 2.0);
    }

    #[test]
    fn gradient_with_pure_distance_term() {
        let problem = SparsityProblem::new(
            Quadratic { center: vec![0.0; 3], scale: 0.0, ineq_bound: None, lower: None },
            vec![0, 1, 2],
            SparsityMode::Cardinality(3),
            vec![0.0; 3],
        )
        .unwrap();
        let g = grad_x_penalty(&problem, &[1.0, 2.0, 3.0], &[0.0, 2.0, 1.0], 2.0).unwrap();
        assert_eq!(g, vec![2.0, 0.0, 4.0]);
    }

    #[test]
    fn projected_residual_on_half_line() {
        // q = (x + 1)^2 / 2 on [0, inf) at x = 0: P(0 - 1) = 0.
        let mut oracle = Quadratic::new(vec![-1.0]);
        oracle.lower = Some(0.0);
        let problem = SparsityProblem::new(oracle, vec![], SparsityMode::Cardinality(0), vec![0.0]).unwrap();
        assert_eq!(projected_gradient_residual(&problem, &[0.0], &[], 1.0).unwrap(), 0.0);
        // unconstrained: residual equals the gradient norm
        let p2 = SparsityProblem::new(Quadratic::new(vec![-1.0, 2.0]), vec![], SparsityMode::Cardinality(0), vec![0.0, 0.0])
            .unwrap();
        let r = projected_gradient_residual(&p2, &[0.0, 0.0], &[], 1.0).unwrap();
        assert!((r - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn feasibility_checks() {
        let problem =
            SparsityProblem::new(Quadratic::new(vec![0.0, 0.0]), vec![0, 1], SparsityMode::Cardinality(1), vec![0.0, 0.0])
                .unwrap();
        assert!(!is_feasible(&problem, &[1.0, 1.0], 1e-8).unwrap().feasible);
        assert!(is_feasible(&problem, &[1.0, 0.0], 1e-8).unwrap().feasible);

        let mut oracle = Quadratic::new(vec![0.0]);
        oracle.ineq_bound = Some(1.0);
        let p2 = SparsityProblem::new(oracle, vec![], SparsityMode::Cardinality(0), vec![0.0]).unwrap();
        let tol = 1e-6;
        assert!(is_feasible(&p2, &[1.0 + 0.5 * tol], tol).unwrap().feasible);
        assert!(!is_feasible(&p2, &[1.0 + 2.0 * tol], tol).unwrap().feasible);
    }

    #[test]
    fn construction_validates() {
        let q = || Quadratic::new(vec![0.0, 0.0]);
        assert!(SparsityProblem::new(q(), vec![1, 0], SparsityMode::Cardinality(1), vec![0.0; 2]).is_err());
        assert!(SparsityProblem::new(q(), vec![0, 2], SparsityMode::Cardinality(1), vec![0.0; 2]).is_err());
        assert!(SparsityProblem::new(q(), vec![0, 1], SparsityMode::Cardinality(3), vec![0.0; 2]).is_err());
        assert!(SparsityProblem::new(q(), vec![0, 1], SparsityMode::Regularized(-1.0), vec![0.0; 2]).is_err());
        assert!(matches!(
            SparsityProblem::new(q(), vec![0, 1], SparsityMode::Cardinality(1), vec![1.0, 1.0]),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn kkt_at_unconstrained_minimizer() {
        let problem =
            SparsityProblem::new(Quadratic::new(vec![1.0, -2.0]), vec![0, 1], SparsityMode::Cardinality(2), vec![0.0, 0.0])
                .unwrap();
        let rep = kkt_residual(&problem, &[1.0, -2.0], &[], &[], &[0.0, 0.0]).unwrap();
        assert!(rep.stationarity_residual <= 1e-8);
        assert_eq!(rep.complementarity_residual, 0.0);
        assert_eq!(rep.feasibility_residual, 0.0);
        assert!(kkt_residual(&problem, &[1.0, -2.0], &[1.0], &[], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn kkt_sign_violation() {
        let mut oracle = Quadratic::new(vec![0.0]);
        oracle.ineq_bound = Some(1.0);
        let problem = SparsityProblem::new(oracle, vec![], SparsityMode::Cardinality(0), vec![0.0]).unwrap();
        let rep = kkt_residual(&problem, &[0.0], &[-0.75], &[], &[]).unwrap();
        assert_eq!(rep.sign_violation, 0.75);
        assert_eq!(rep.complementarity_residual, 0.75);
    }

    #[test]
    fn drop_smallest_ties_and_floor() {
        let s = CoordinateSparsity::new(4, SparsityMode::Cardinality(3)).unwrap();
        assert_eq!(s.drop_smallest(&[2.0, -1.0, 0.0, 1.0]), Some(vec![2.0, 0.0, 0.0, 1.0]));
        assert_eq!(s.drop_smallest(&[0.0, 3.0, 0.0, 0.0]), None);
    }
}
