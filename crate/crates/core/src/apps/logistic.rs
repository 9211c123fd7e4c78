//! Cardinality-constrained logistic regression.
//!
//! With samples `z_i` and outcomes `b_i = +-1`, the average logistic loss
//! of `x = (v, w)` is `sum_i theta(b_i (w^T z_i + v)) / n` with
//! `theta(t) = log(1 + exp(-t))`. The budget applies to `w` only.

use alloc::vec;
use alloc::vec::Vec;

use crate::bcd::{BcdConfig, BcdCriteria, SpgXStep};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::model::{ProblemOracle, SparsityMode, SparsityProblem};
use crate::pd::{pd_solve_constrained, OuterCriterion, PdConfig, PdStart, SolveReport};
use crate::subsolvers::SpgConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticDataset {
    features: DenseMatrix,
    outcomes: Vec<f64>,
}

impl LogisticDataset {
    /// `features` holds one sample per row.
    pub fn new(features: DenseMatrix, outcomes: Vec<f64>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::invalid("dataset needs at least one sample"));
        }
        if outcomes.len() != features.rows() {
            return Err(Error::invalid(alloc::format!(
                "{} outcomes for {} samples",
                outcomes.len(),
                features.rows()
            )));
        }
        if let Some(i) = outcomes.iter().position(|b| *b != 1.0 && *b != -1.0) {
            return Err(Error::invalid(alloc::format!("outcome {i} is {}, expected +1 or -1", outcomes[i])));
        }
        Ok(Self { features, outcomes })
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    /// Shifts and scales every feature to zero mean and unit variance
    /// (population variance). Constant features are only centered.
    pub fn standardized(&self) -> Self {
        let n = self.n() as f64;
        let mut z = self.features.clone();
        for j in 0..z.cols() {
            let col = z.col_mut(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = math::sqrt(var);
            for v in col.iter_mut() {
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        Self { features: z, outcomes: self.outcomes.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl LogisticModel {
    pub fn zeros(p: usize) -> Self {
        Self { intercept: 0.0, weights: vec![0.0; p] }
    }

    /// `(v, w)` as one vector.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.weights.len() + 1);
        x.push(self.intercept);
        x.extend_from_slice(&self.weights);
        x
    }

    pub fn from_vector(x: &[f64]) -> Self {
        Self { intercept: x[0], weights: x[1..].to_vec() }
    }
}

/// `theta(t) = log(1 + exp(-t))`, evaluated without overflow.
pub fn theta(t: f64) -> f64 {
    (-t).max(0.0) + math::ln_1p(math::exp(-t.abs()))
}

/// `theta'(t) = -1 / (1 + exp(t))`
pub fn theta_prime(t: f64) -> f64 {
    if t >= 0.0 {
        let e = math::exp(-t);
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + math::exp(t))
    }
}

/// Average loss at `x = (v, w)`; writes the gradient into `grad`.
pub fn logistic_loss_vec(data: &LogisticDataset, x: &[f64], grad: &mut [f64]) -> f64 {
    let n = data.n();
    let mut t = vec![0.0; n];
    data.features.mul_vec_into(&x[1..], &mut t);
    let mut value = 0.0;
    let mut dv = 0.0;
    for (ti, bi) in t.iter_mut().zip(&data.outcomes) {
        let m = bi * (*ti + x[0]);
        value += theta(m);
        let d = theta_prime(m) * bi / n as f64;
        dv += d;
        *ti = d;
    }
    grad[0] = dv;
    data.features.t_mul_vec_into(&t, &mut grad[1..]);
    value / n as f64
}

/// Average loss and its gradient with respect to `(v, w)`.
pub fn logistic_loss(data: &LogisticDataset, model: &LogisticModel) -> Result<(f64, Vec<f64>)> {
    if model.weights.len() != data.p() {
        return Err(Error::invalid(alloc::format!("model has {} weights, data {} features", model.weights.len(), data.p())));
    }
    let x = model.to_vector();
    let mut grad = vec![0.0; x.len()];
    let v = logistic_loss_vec(data, &x, &mut grad);
    Ok((v, grad))
}

/// Percentage of samples with `sgn(w^T z + v) != b`, where `sgn(0) = -1`.
pub fn error_rate(model: &LogisticModel, features: &DenseMatrix, outcomes: &[f64]) -> f64 {
    let t = features.mul_vec(&model.weights);
    let wrong = t
        .iter()
        .zip(outcomes)
        .filter(|(ti, b)| {
            let s = if **ti + model.intercept > 0.0 { 1.0 } else { -1.0 };
            s != **b
        })
        .count();
    100.0 * wrong as f64 / outcomes.len().max(1) as f64
}

/// Objective oracle over `x = (v, w)` on the whole space.
#[derive(Debug, Clone)]
pub struct LogisticOracle<'a> {
    pub data: &'a LogisticDataset,
}

impl ProblemOracle for LogisticOracle<'_> {
    fn dim(&self) -> usize {
        self.data.p() + 1
    }

    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        logistic_loss_vec(self.data, x, grad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub pd: PdConfig,
    pub spg: SpgConfig,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            pd: PdConfig {
                rho0: 0.1,
                sigma: math::sqrt(10.0),
                outer_tol: 1e-3,
                outer_criterion: OuterCriterion::Absolute,
                bcd: BcdConfig {
                    relative_change_tol: 5e-4,
                    criteria: BcdCriteria::ITERATE_CHANGE.gated(),
                    x_step_tol: 1e-4,
                    ..BcdConfig::default()
                },
                ..PdConfig::default()
            },
            spg: SpgConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticSolution {
    /// Intercept from `x`, weights from the sparse copy `y`.
    pub model: LogisticModel,
    pub loss: f64,
    pub report: SolveReport,
}

/// Sparse logistic regression with `||w||_0 <= r`.
///
/// `y0` is the starting copy of `w` (at most `r` nonzeros); zero when
/// absent.
pub fn solve_sparse_logistic(
    data: &LogisticDataset,
    r: usize,
    config: &LogisticConfig,
    y0: Option<Vec<f64>>,
) -> Result<LogisticSolution> {
    let p = data.p();
    if r == 0 || r > p {
        return Err(Error::invalid(alloc::format!("budget r = {r} outside [1, {p}]")));
    }
    let oracle = LogisticOracle { data };
    let problem = SparsityProblem::new(oracle, (1..=p).collect(), SparsityMode::Cardinality(r), vec![0.0; p + 1])?;
    let mut step = SpgXStep { config: config.spg.clone() };
    let start = PdStart { x0: None, y0 };
    let report = pd_solve_constrained(&problem, &mut step, &config.pd, &start)?;
    let model = LogisticModel { intercept: report.x[0], weights: report.y.clone() };
    let (loss, _) = logistic_loss(data, &model)?;
    Ok(LogisticSolution { model, loss, report })
}
