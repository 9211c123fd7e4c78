//! Seeded instance generators.

use sparsepd_core::apps::covsel::CovselInstance;
use sparsepd_core::apps::cs::CsInstance;
use sparsepd_core::apps::logistic::LogisticDataset;
use sparsepd_core::linalg::{orthonormalize_rows, sym_eig, Cholesky, DenseMatrix};

use crate::error::{Error, Result};
use crate::rng::{Experiment, Purpose, Stream};

/// Where a generator draws its numbers from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Source {
    pub seed: u64,
    pub experiment: Experiment,
    pub index: u64,
}

impl Source {
    pub fn new(seed: u64, experiment: Experiment, index: u64) -> Self {
        Self { seed, experiment, index }
    }

    pub fn stream(&self, purpose: Purpose) -> Stream {
        Stream::new(self.seed, self.experiment, self.index, purpose)
    }
}

fn gaussian_matrix(rows: usize, cols: usize, stream: &mut Stream) -> DenseMatrix {
    DenseMatrix::new(rows, cols, stream.gaussian_vec(rows * cols)).expect("sizes agree")
}

fn sensing_matrix(n: usize, p: usize, orthonormal: bool, source: &Source) -> Result<DenseMatrix> {
    let a = gaussian_matrix(n, p, &mut source.stream(Purpose::Matrix));
    if orthonormal {
        Ok(orthonormalize_rows(&a)?)
    } else {
        Ok(a)
    }
}

/// Planted noiseless instance: Gaussian `A` (optionally with orthonormal
/// rows), `u` with `r` standard Gaussian entries at uniform positions,
/// `b = A u`.
pub fn gen_cs_instance(n: usize, p: usize, r: usize, source: &Source, orthonormal: bool) -> Result<CsInstance> {
    if n == 0 || r > n || n > p {
        return Err(Error::invalid(format!("need 0 < n and r <= n <= p, got n={n}, p={p}, r={r}")));
    }
    let a = sensing_matrix(n, p, orthonormal, source)?;
    let mut sig = source.stream(Purpose::Signal);
    let support = sig.sample_indices(p, r);
    let mut u = vec![0.0; p];
    for &i in &support {
        let mut v = sig.gaussian();
        while v == 0.0 {
            v = sig.gaussian();
        }
        u[i] = v;
    }
    let b = a.mul_vec(&u);
    Ok(CsInstance::new(a, b, Some(u))?)
}

/// Noisy instance: Gaussian `A` (optionally with orthonormal rows) and an
/// independent standard Gaussian `b`.
pub fn gen_cs_noisy_instance(n: usize, p: usize, source: &Source, orthonormal: bool) -> Result<CsInstance> {
    if n == 0 || n > p {
        return Err(Error::invalid(format!("need 0 < n <= p, got n={n}, p={p}")));
    }
    let a = sensing_matrix(n, p, orthonormal, source)?;
    let b = source.stream(Purpose::Observation).gaussian_vec(n);
    Ok(CsInstance::new(a, b, None)?)
}

/// Random starting copy with at most `r` nonzero standard Gaussian entries.
pub fn random_sparse_start(p: usize, r: usize, source: &Source) -> Vec<f64> {
    let mut s = source.stream(Purpose::Start);
    let mut y = vec![0.0; p];
    for i in s.sample_indices(p, r.min(p)) {
        y[i] = s.gaussian();
    }
    y
}

/// Two-class dataset: the first `n/2` samples are positive with features
/// `N(mu+_j, 1)`, `mu+_j ~ U[0, 1]`; the rest negative with `N(mu-_j, 1)`,
/// `mu-_j ~ U[-1, 0]`. The means are drawn once per feature.
pub fn gen_logistic_instance(n: usize, p: usize, source: &Source) -> Result<LogisticDataset> {
    if n == 0 || n % 2 != 0 || p == 0 {
        return Err(Error::invalid(format!("need even n > 0 and p > 0, got n={n}, p={p}")));
    }
    let mut means = source.stream(Purpose::Signal);
    let mu_pos: Vec<f64> = (0..p).map(|_| means.uniform_in(0.0, 1.0)).collect();
    let mu_neg: Vec<f64> = (0..p).map(|_| means.uniform_in(-1.0, 0.0)).collect();
    let mut noise = source.stream(Purpose::Matrix);
    let half = n / 2;
    let mut z = DenseMatrix::zeros(n, p);
    for i in 0..n {
        let mu = if i < half { &mu_pos } else { &mu_neg };
        for j in 0..p {
            z[(i, j)] = mu[j] + noise.gaussian();
        }
    }
    let outcomes = (0..n).map(|i| if i < half { 1.0 } else { -1.0 }).collect();
    Ok(LogisticDataset::new(z, outcomes)?)
}

/// Structure of the true inverse covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovselPattern {
    /// Off-diagonal pairs kept with probability `density`, values uniform on
    /// `[-1, 1]`, diagonal `1 + sum_j |M_ij|`.
    DenseRandom { density: f64 },
    /// `pairs` random off-diagonal pairs equal to `+1` or `-1`, sharing no
    /// row while `2 pairs <= p`; diagonal `1 + U[0, 0.1]`, boosted until
    /// positive definite.
    Pm1Sparse { pairs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovselSpec {
    pub p: usize,
    pub pattern: CovselPattern,
    pub tau: f64,
    pub vartheta: f64,
}

impl CovselSpec {
    pub fn new(p: usize, pattern: CovselPattern) -> Self {
        Self { p, pattern, tau: 0.15, vartheta: 1e-4 }
    }
}

const DIAGONAL_BOOST: f64 = 0.25;
const MAX_BOOSTS: usize = 20;

fn upper_pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|i| ((i + 1)..p).map(move |j| (i, j))).collect()
}

/// Random row-disjoint pairs while rows remain, then random pairs among the
/// rest.
fn pm1_pairs(p: usize, pairs: usize, s: &mut Stream) -> Vec<(usize, usize)> {
    let order = s.permutation(p);
    let mut chosen: Vec<(usize, usize)> =
        order.chunks_exact(2).take(pairs).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
    if chosen.len() < pairs {
        let rest: Vec<(usize, usize)> = upper_pairs(p).into_iter().filter(|q| !chosen.contains(q)).collect();
        let extra = s.sample_indices(rest.len(), pairs - chosen.len());
        chosen.extend(extra.into_iter().map(|k| rest[k]));
    }
    chosen
}

fn truth_inverse(spec: &CovselSpec, source: &Source) -> Result<DenseMatrix> {
    let p = spec.p;
    let mut s = source.stream(Purpose::Pattern);
    let mut m = DenseMatrix::zeros(p, p);
    match spec.pattern {
        CovselPattern::DenseRandom { density } => {
            if !(density > 0.0 && density <= 1.0) {
                return Err(Error::invalid(format!("density must lie in (0, 1], got {density}")));
            }
            for (i, j) in upper_pairs(p) {
                if s.uniform() < density {
                    let v = s.uniform_in(-1.0, 1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            for i in 0..p {
                let row: f64 = (0..p).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
                m[(i, i)] = 1.0 + row;
            }
            Ok(m)
        }
        CovselPattern::Pm1Sparse { pairs } => {
            let all = upper_pairs(p);
            if pairs > all.len() {
                return Err(Error::invalid(format!("{pairs} pairs requested, only {} exist", all.len())));
            }
            for (i, j) in pm1_pairs(p, pairs, &mut s) {
                let v = if s.coin() { 1.0 } else { -1.0 };
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            for i in 0..p {
                m[(i, i)] = 1.0 + 0.1 * s.uniform();
            }
            for _ in 0..=MAX_BOOSTS {
                if Cholesky::factor(&m).is_ok() {
                    return Ok(m);
                }
                for i in 0..p {
                    m[(i, i)] += DIAGONAL_BOOST;
                }
            }
            Err(Error::Core(sparsepd_core::Error::Numeric(format!(
                "no positive definite +-1 pattern after {MAX_BOOSTS} diagonal boosts"
            ))))
        }
    }
}

/// Covariance selection instance: true inverse `T` per the pattern,
/// `B = T^{-1} + tau V` with `V` symmetric uniform on `[-1, 1]`,
/// `S = B - min(lambda_min(B) - vartheta, 0) I`, and
/// `Omega = {(i, j) : T_ij = 0, |i - j| >= floor(p / 2)}`.
pub fn gen_covsel_instance(spec: &CovselSpec, source: &Source) -> Result<CovselInstance> {
    let p = spec.p;
    if p < 2 {
        return Err(Error::invalid(format!("need p >= 2, got {p}")));
    }
    let t = truth_inverse(spec, source)?;
    let mut sigma_t = Cholesky::factor(&t)?.inverse();
    sigma_t.symmetrize();
    let mut noise = source.stream(Purpose::Noise);
    let mut b = sigma_t.clone();
    for j in 0..p {
        for i in 0..=j {
            let v = spec.tau * noise.uniform_in(-1.0, 1.0);
            b[(i, j)] += v;
            if i != j {
                b[(j, i)] += v;
            }
        }
    }
    let lmin = sym_eig(&b)?.min_value();
    let shift = (lmin - spec.vartheta).min(0.0);
    for i in 0..p {
        b[(i, i)] -= shift;
    }
    let omega: Vec<(usize, usize)> =
        upper_pairs(p).into_iter().filter(|&(i, j)| t[(i, j)] == 0.0 && j - i >= p / 2).collect();
    Ok(CovselInstance::new(b, &omega)?.with_truth(sigma_t, t)?)
}

/// Nonzero off-diagonal pairs (unordered) of a matrix.
pub fn off_diagonal_pairs(m: &DenseMatrix) -> usize {
    upper_pairs(m.rows()).into_iter().filter(|&(i, j)| m[(i, j)] != 0.0).count()
}
