//! Sparse inverse covariance selection.
//!
//! Maximizes `log det X - <S, X>` over positive semidefinite `X` with at
//! most `r` nonzero off-diagonal pairs outside `Omega` and `X_ij = 0` on
//! `Omega`. The decision variable is the column-major vector of all `p^2`
//! entries; the copy `Y` is symmetric, carries the diagonal freely, is zero
//! on `Omega` and keeps the `r` largest off-diagonal pairs.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::bcd::{BcdConfig, BcdCriteria, XStep, XStepInfo};
use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Cholesky, DenseMatrix};
use crate::math;
use crate::model::{ProblemOracle, SparseStructure, SparsityMode, SparsityProblem};
use crate::pd::{pd_solve_constrained, OuterCriterion, PdConfig, PdStart, SolveReport};
use crate::subsolvers::logdet_prox;

#[derive(Debug, Clone, PartialEq)]
pub struct CovselInstance {
    sigma_hat: DenseMatrix,
    /// `p x p` column-major flags; symmetric, false on the diagonal.
    omega: Vec<bool>,
    sigma_true: Option<DenseMatrix>,
    truth_inverse: Option<DenseMatrix>,
}

impl CovselInstance {
    /// `omega` lists unordered or ordered off-diagonal pairs; both orders
    /// are marked.
    pub fn new(sigma_hat: DenseMatrix, omega: &[(usize, usize)]) -> Result<Self> {
        if !sigma_hat.is_square() || sigma_hat.rows() == 0 {
            return Err(Error::invalid("sample covariance must be a nonempty square matrix"));
        }
        if !sigma_hat.is_symmetric(1e-12 * (1.0 + sigma_hat.max_abs())) {
            return Err(Error::invalid("sample covariance must be symmetric"));
        }
        if Cholesky::factor(&sigma_hat).is_err() {
            return Err(Error::invalid("sample covariance must be positive definite"));
        }
        let p = sigma_hat.rows();
        let mut mask = vec![false; p * p];
        for &(i, j) in omega {
            if i >= p || j >= p || i == j {
                return Err(Error::invalid(alloc::format!("invalid Omega pair ({i}, {j})")));
            }
            mask[i + j * p] = true;
            mask[j + i * p] = true;
        }
        Ok(Self { sigma_hat, omega: mask, sigma_true: None, truth_inverse: None })
    }

    /// Attaches the true covariance and its inverse.
    pub fn with_truth(mut self, sigma_true: DenseMatrix, truth_inverse: DenseMatrix) -> Result<Self> {
        let p = self.p();
        if sigma_true.rows() != p || sigma_true.cols() != p || truth_inverse.rows() != p || truth_inverse.cols() != p {
            return Err(Error::invalid("truth matrices have the wrong size"));
        }
        self.sigma_true = Some(sigma_true);
        self.truth_inverse = Some(truth_inverse);
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.sigma_hat.rows()
    }

    pub fn sigma_hat(&self) -> &DenseMatrix {
        &self.sigma_hat
    }

    pub fn sigma_true(&self) -> Option<&DenseMatrix> {
        self.sigma_true.as_ref()
    }

    pub fn truth_inverse(&self) -> Option<&DenseMatrix> {
        self.truth_inverse.as_ref()
    }

    pub fn in_omega(&self, i: usize, j: usize) -> bool {
        self.omega[i + j * self.p()]
    }

    /// Unordered pairs in `Omega`.
    pub fn omega_size(&self) -> usize {
        self.omega.iter().filter(|b| **b).count() / 2
    }

    /// Unordered off-diagonal pairs outside `Omega`.
    pub fn free_pairs(&self) -> usize {
        let p = self.p();
        p * (p - 1) / 2 - self.omega_size()
    }
}

/// `log det X - <S, X>`
pub fn log_likelihood(sigma_hat: &DenseMatrix, x: &DenseMatrix) -> Result<f64> {
    let chol = Cholesky::factor(x).map_err(|_| Error::invalid("log-likelihood needs a positive definite X"))?;
    Ok(chol.log_det() - sigma_hat.inner(x))
}

/// `(<S_t, X> - log det(S_t X) - p) / p`
pub fn normalized_entropy_loss(sigma_ref: &DenseMatrix, x: &DenseMatrix) -> Result<f64> {
    let cs = Cholesky::factor(sigma_ref).map_err(|_| Error::invalid("entropy loss needs a positive definite reference"))?;
    let cx = Cholesky::factor(x).map_err(|_| Error::invalid("entropy loss needs a positive definite X"))?;
    let p = x.rows() as f64;
    Ok((sigma_ref.inner(x) - cs.log_det() - cx.log_det() - p) / p)
}

/// Fraction of off-diagonal entries whose zero/nonzero status in `x`
/// (at `tol`) matches `truth` (exact zeros).
pub fn pattern_match(x: &DenseMatrix, truth: &DenseMatrix, tol: f64) -> f64 {
    let p = x.rows();
    if p < 2 {
        return 1.0;
    }
    let mut agree = 0usize;
    for j in 0..p {
        for i in 0..p {
            if i != j && ((x[(i, j)].abs() > tol) == (truth[(i, j)] != 0.0)) {
                agree += 1;
            }
        }
    }
    agree as f64 / (p * (p - 1)) as f64
}

/// `-log det X + <S, X>` over the `p^2` entries, with projection onto the
/// positive semidefinite cone.
#[derive(Debug, Clone)]
pub struct CovselOracle<'a> {
    pub sigma_hat: &'a DenseMatrix,
}

impl CovselOracle<'_> {
    fn matrix(&self, x: &[f64]) -> DenseMatrix {
        let p = self.sigma_hat.rows();
        DenseMatrix::new(p, p, x.to_vec()).unwrap_or_else(|_| DenseMatrix::from_fn(p, p, |_, _| f64::NAN))
    }
}

impl ProblemOracle for CovselOracle<'_> {
    fn dim(&self) -> usize {
        self.sigma_hat.rows() * self.sigma_hat.rows()
    }

    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let m = self.matrix(x);
        let Ok(chol) = Cholesky::factor(&m) else {
            grad.fill(f64::NAN);
            return f64::INFINITY;
        };
        let inv = chol.inverse();
        for ((g, s), v) in grad.iter_mut().zip(self.sigma_hat.as_slice()).zip(inv.as_slice()) {
            *g = s - v;
        }
        -chol.log_det() + self.sigma_hat.inner(&m)
    }

    fn objective_value(&self, x: &[f64]) -> f64 {
        let m = self.matrix(x);
        match Cholesky::factor(&m) {
            Ok(chol) => -chol.log_det() + self.sigma_hat.inner(&m),
            Err(_) => f64::INFINITY,
        }
    }

    fn project(&self, x: &mut [f64]) -> Result<()> {
        let mut m = self.matrix(x);
        m.symmetrize();
        let proj = sym_eig(&m)?.reconstruct_with(|l| l.max(0.0));
        x.copy_from_slice(proj.as_slice());
        Ok(())
    }
}

/// Symmetric copy structure: diagonal free, `Omega` zero, at most `r`
/// nonzero unordered off-diagonal pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CovselSparsity {
    p: usize,
    omega: Vec<bool>,
    r: usize,
    /// Candidate pairs `(i, j)`, `i < j`, outside `Omega`, in row-major
    /// order of the upper triangle.
    pairs: Vec<(usize, usize)>,
}

impl CovselSparsity {
    pub fn new(instance: &CovselInstance, r: usize) -> Result<Self> {
        let p = instance.p();
        let mut pairs = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                if !instance.in_omega(i, j) {
                    pairs.push((i, j));
                }
            }
        }
        if r > pairs.len() {
            return Err(Error::invalid(alloc::format!("budget {r} exceeds the {} free pairs", pairs.len())));
        }
        Ok(Self { p, omega: instance.omega.clone(), r, pairs })
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i + j * self.p
    }
}

impl SparseStructure for CovselSparsity {
    fn len(&self) -> usize {
        self.p * self.p
    }

    fn mode(&self) -> SparsityMode {
        SparsityMode::Cardinality(self.r)
    }

    fn count(&self, y: &[f64], tol: f64) -> usize {
        self.pairs.iter().filter(|&&(i, j)| y[self.at(i, j)].abs() > tol).count()
    }

    fn y_step(&self, target: &[f64], _rho: f64, y: &mut [f64]) {
        y.fill(0.0);
        for i in 0..self.p {
            y[self.at(i, i)] = target[self.at(i, i)];
        }
        if self.r == 0 {
            return;
        }
        let values: Vec<f64> =
            self.pairs.iter().map(|&(i, j)| 0.5 * (target[self.at(i, j)] + target[self.at(j, i)])).collect();
        let mut order: Vec<usize> = (0..self.pairs.len()).collect();
        order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
        for &k in order.iter().take(self.r) {
            let (i, j) = self.pairs[k];
            y[self.at(i, j)] = values[k];
            y[self.at(j, i)] = values[k];
        }
    }

    fn admits(&self, y: &[f64]) -> bool {
        if y.len() != self.len() {
            return false;
        }
        for j in 0..self.p {
            for i in 0..j {
                let (a, b) = (y[self.at(i, j)], y[self.at(j, i)]);
                if a != b || (self.omega[self.at(i, j)] && a != 0.0) {
                    return false;
                }
            }
        }
        self.count(y, 0.0) <= self.r
    }

    fn drop_smallest(&self, y: &[f64]) -> Option<Vec<f64>> {
        if self.count(y, 0.0) <= 1 {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for &(i, j) in &self.pairs {
            let v = y[self.at(i, j)].abs();
            if v == 0.0 {
                continue;
            }
            match best {
                Some((a, b)) if y[self.at(a, b)].abs() <= v => {}
                _ => best = Some((i, j)),
            }
        }
        let (i, j) = best?;
        let mut out = y.to_vec();
        out[self.at(i, j)] = 0.0;
        out[self.at(j, i)] = 0.0;
        Some(out)
    }

    fn multiplier_free(&self, y: &[f64], out: &mut [bool]) {
        for j in 0..self.p {
            for i in 0..self.p {
                let k = self.at(i, j);
                out[k] = i == j || (!self.omega[k] && y[k] != 0.0);
            }
        }
    }
}

/// Exact `x`-step: `X = prox(Y - S / rho)` for `-log det` with weight `rho`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CovselXStep;

impl<'a> XStep<CovselOracle<'a>> for CovselXStep {
    fn solve(
        &mut self,
        problem: &SparsityProblem<CovselOracle<'a>>,
        x: &mut [f64],
        y: &[f64],
        rho: f64,
        _tol: f64,
    ) -> Result<XStepInfo> {
        let s = problem.oracle().sigma_hat;
        let p = s.rows();
        let mut c = DenseMatrix::new(p, p, y.to_vec())?;
        c.add_scaled(-1.0 / rho, s);
        c.symmetrize();
        let out = logdet_prox(&c, rho)?;
        x.copy_from_slice(out.as_slice());
        Ok(XStepInfo { iterations: 1, converged: true })
    }

    fn is_exact(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovselConfig {
    pub pd: PdConfig,
}

impl Default for CovselConfig {
    fn default() -> Self {
        Self {
            pd: PdConfig {
                rho0: 1.0,
                sigma: math::sqrt(10.0),
                outer_tol: 1e-4,
                outer_criterion: OuterCriterion::Absolute,
                bcd: BcdConfig {
                    objective_change_tol: 1e-4,
                    criteria: BcdCriteria::OBJECTIVE_CHANGE.gated(),
                    ..BcdConfig::default()
                },
                ..PdConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovselSolution {
    /// The sparse copy `Y`: diagonal and kept pairs of the final `X`.
    pub x: DenseMatrix,
    pub log_likelihood: f64,
    /// Nonzero off-diagonal pairs (unordered).
    pub pairs: usize,
    pub report: SolveReport,
}

/// Solves the covariance selection problem with at most `r` nonzero
/// unordered off-diagonal pairs outside `Omega`.
///
/// Starts from `Y = diag(S)^{-1}`. The returned matrix is the final sparse
/// copy, checked to be positive definite.
pub fn solve_covsel(instance: &CovselInstance, r: usize, config: &CovselConfig) -> Result<CovselSolution> {
    let p = instance.p();
    let structure = CovselSparsity::new(instance, r)?;
    let d: Vec<f64> = instance.sigma_hat.diag().iter().map(|s| 1.0 / s).collect();
    let start = DenseMatrix::from_diag(&d).into_vec();
    let oracle = CovselOracle { sigma_hat: &instance.sigma_hat };
    let problem = SparsityProblem::with_structure(oracle, (0..p * p).collect(), Box::new(structure), start.clone())?;
    let report = pd_solve_constrained(&problem, &mut CovselXStep, &config.pd, &PdStart { x0: None, y0: Some(start) })?;
    let x = DenseMatrix::new(p, p, report.y.clone())?;
    let log_likelihood = log_likelihood(&instance.sigma_hat, &x)
        .map_err(|_| Error::numeric("sparse copy of the solution is not positive definite"))?;
    let pairs = problem.structure().count(&report.y, 0.0);
    Ok(CovselSolution { x, log_likelihood, pairs, report })
}
