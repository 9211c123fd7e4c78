//! Compressed sensing.
//!
//! Noiseless: `min ||x||_0` subject to `A x = b`, solved in l0-regularized
//! form with `X = {x : A x = b}`. Noisy: `min ||A x - b||^2 / 2` subject to
//! `||x||_0 <= r` on the whole space.

use alloc::vec;
use alloc::vec::Vec;

use crate::bcd::{BcdConfig, BcdCriteria, XStep, XStepInfo};
use crate::error::{Error, Result};
use crate::linalg::{basic_solution, vector, DenseMatrix};
use crate::math;
use crate::model::{ProblemOracle, SparsityMode, SparsityProblem};
use crate::pd::{pd_solve_constrained, pd_solve_regularized, OuterCriterion, PdConfig, PdStart, SolveReport};
use crate::subsolvers::{cg_solve, AffineProjector};

#[derive(Debug, Clone, PartialEq)]
pub struct CsInstance {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    /// Planted signal, when known.
    pub truth: Option<Vec<f64>>,
}

impl CsInstance {
    pub fn new(a: DenseMatrix, b: Vec<f64>, truth: Option<Vec<f64>>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::invalid(alloc::format!("b has length {}, A has {} rows", b.len(), a.rows())));
        }
        if let Some(u) = &truth {
            if u.len() != a.cols() {
                return Err(Error::invalid("planted signal has the wrong length"));
            }
        }
        Ok(Self { a, b, truth })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn p(&self) -> usize {
        self.a.cols()
    }

    /// `||A x - b||`
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        vector::norm2(&r)
    }
}

/// `f = 0` on the affine set `{x : A x = b}`.
#[derive(Debug, Clone)]
pub struct AffineOracle {
    pub projector: AffineProjector,
}

impl ProblemOracle for AffineOracle {
    fn dim(&self) -> usize {
        self.projector.dim()
    }

    fn objective(&self, _x: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        0.0
    }

    fn objective_value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn project(&self, x: &mut [f64]) -> Result<()> {
        self.projector.project_in_place(x);
        Ok(())
    }
}

/// Exact `x`-step for the noiseless problem: `x = P(y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AffineXStep;

impl XStep<AffineOracle> for AffineXStep {
    fn solve(&mut self, problem: &SparsityProblem<AffineOracle>, x: &mut [f64], y: &[f64], _rho: f64, _tol: f64) -> Result<XStepInfo> {
        x.copy_from_slice(y);
        problem.oracle().projector.project_in_place(x);
        Ok(XStepInfo { iterations: 1, converged: true })
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// `||A x - b||^2 / 2` on the whole space.
#[derive(Debug, Clone)]
pub struct LeastSquaresOracle<'a> {
    pub a: &'a DenseMatrix,
    pub b: &'a [f64],
}

impl ProblemOracle for LeastSquaresOracle<'_> {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(self.b) {
            *ri -= bi;
        }
        self.a.t_mul_vec_into(&r, grad);
        0.5 * vector::norm_sq(&r)
    }

    fn objective_value(&self, x: &[f64]) -> f64 {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(self.b) {
            *ri -= bi;
        }
        0.5 * vector::norm_sq(&r)
    }
}

/// Conjugate gradient on `(A^T A + rho I) x = A^T b + rho y`, warm started.
#[derive(Debug, Clone, Copy)]
pub struct CgXStep {
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for CgXStep {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 1000 }
    }
}

impl<'a> XStep<LeastSquaresOracle<'a>> for CgXStep {
    fn solve(
        &mut self,
        problem: &SparsityProblem<LeastSquaresOracle<'a>>,
        x: &mut [f64],
        y: &[f64],
        rho: f64,
        _tol: f64,
    ) -> Result<XStepInfo> {
        let o = problem.oracle();
        let mut rhs = o.a.t_mul_vec(o.b);
        vector::axpy(rho, y, &mut rhs);
        let mut ax = vec![0.0; o.a.rows()];
        let apply = |v: &[f64], out: &mut [f64]| {
            o.a.mul_vec_into(v, &mut ax);
            o.a.t_mul_vec_into(&ax, out);
            vector::axpy(rho, v, out);
        };
        let out = cg_solve(apply, &rhs, x, self.tol, self.max_iters)?;
        x.copy_from_slice(&out.x);
        Ok(XStepInfo { iterations: out.iterations, converged: out.converged })
    }

    fn is_exact(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsNoiselessConfig {
    pub nu: f64,
    pub pd: PdConfig,
}

impl Default for CsNoiselessConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            pd: PdConfig {
                rho0: 0.1,
                sigma: 10.0,
                outer_tol: 1e-6,
                outer_criterion: OuterCriterion::Scaled,
                bcd: BcdConfig {
                    relative_change_tol: 1e-5,
                    criteria: BcdCriteria::ITERATE_CHANGE.gated(),
                    ..BcdConfig::default()
                },
                ..PdConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsSolution {
    /// Final `x` (satisfies `A x = b`).
    pub x: Vec<f64>,
    /// Final sparse copy.
    pub y: Vec<f64>,
    /// `||A x - b||` for the noiseless solver, `||A y - b||` for the noisy one.
    pub residual: f64,
    pub report: SolveReport,
}

/// Noiseless recovery, starting from a solution of `A x = b` with at most
/// `n` nonzeros.
pub fn solve_cs_noiseless(instance: &CsInstance, config: &CsNoiselessConfig) -> Result<CsSolution> {
    let projector = AffineProjector::new(instance.a.clone(), instance.b.clone())?;
    let basic = basic_solution(&instance.a, &instance.b)?;
    let mut start = basic.clone();
    projector.project_in_place(&mut start);
    let p = instance.p();
    let oracle = AffineOracle { projector };
    let problem = SparsityProblem::new(oracle, (0..p).collect(), SparsityMode::Regularized(config.nu), start)?;
    let report =
        pd_solve_regularized(&problem, &mut AffineXStep, &config.pd, &PdStart { x0: None, y0: Some(basic) })?;
    let residual = instance.residual(&report.x);
    Ok(CsSolution { x: report.x.clone(), y: report.y.clone(), residual, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsNoisyConfig {
    pub pd: PdConfig,
    pub cg: CgXStep,
}

impl Default for CsNoisyConfig {
    fn default() -> Self {
        Self {
            pd: PdConfig {
                rho0: 1.0,
                sigma: math::sqrt(10.0),
                outer_tol: 1e-3,
                outer_criterion: OuterCriterion::Scaled,
                bcd: BcdConfig {
                    objective_change_tol: 1e-2,
                    criteria: BcdCriteria::OBJECTIVE_CHANGE.gated(),
                    ..BcdConfig::default()
                },
                ..PdConfig::default()
            },
            cg: CgXStep::default(),
        }
    }
}

impl PartialEq for CgXStep {
    fn eq(&self, other: &Self) -> bool {
        self.tol == other.tol && self.max_iters == other.max_iters
    }
}

/// Noisy recovery with `||x||_0 <= r`. The returned solution is the sparse
/// copy `y`; `start` warm starts `x` and `y`.
pub fn solve_cs_noisy(instance: &CsInstance, r: usize, config: &CsNoisyConfig, start: &PdStart) -> Result<CsSolution> {
    let p = instance.p();
    if r == 0 || r > p {
        return Err(Error::invalid(alloc::format!("budget r = {r} outside [1, {p}]")));
    }
    let oracle = LeastSquaresOracle { a: &instance.a, b: &instance.b };
    let problem = SparsityProblem::new(oracle, (0..p).collect(), SparsityMode::Cardinality(r), vec![0.0; p])?;
    let mut step = config.cg;
    let report = pd_solve_constrained(&problem, &mut step, &config.pd, start)?;
    let residual = instance.residual(&report.y);
    Ok(CsSolution { x: report.x.clone(), y: report.y.clone(), residual, report })
}
