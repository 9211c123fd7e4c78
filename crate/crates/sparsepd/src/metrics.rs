use sparsepd_core::linalg::vector;

/// `||x - u|| / p`
pub fn mse(x: &[f64], u: &[f64]) -> f64 {
    vector::dist2(x, u) / x.len().max(1) as f64
}

/// Same cardinality as `u` and `mse < 1e-4`.
pub fn recovered(x: &[f64], u: &[f64]) -> bool {
    vector::count_nonzero(x, 0.0) == vector::count_nonzero(u, 0.0) && mse(x, u) < 1e-4
}

/// Per-trial outcome of one solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsRow {
    pub cardinality: usize,
    pub residual: f64,
    pub mse: f64,
    pub recovered: bool,
    pub error_rate: f64,
    pub log_likelihood: f64,
    pub entropy_loss: f64,
    pub time_ms: f64,
    pub iterations: usize,
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}
