use alloc::vec::Vec;

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::math;

pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// `S = V diag(values) V^T` with orthonormal columns in `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Eigenvectors as columns, ordered like `values`.
    pub vectors: DenseMatrix,
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    /// `V diag(f(values)) V^T`
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> DenseMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let v = &self.vectors;
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &d) in mapped.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let col = v.col(k);
            for j in 0..n {
                let s = d * col[j];
                if s == 0.0 {
                    continue;
                }
                for i in j..n {
                    out[(i, j)] += col[i] * s;
                }
            }
        }
        for j in 0..n {
            for i in (j + 1)..n {
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_with(|v| v)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::INFINITY)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps with the threshold
/// strategy (rotations skipped below a threshold during the first sweeps).
pub fn sym_eig(s: &DenseMatrix) -> Result<EigenDecomposition> {
    sym_eig_with(s, DEFAULT_MAX_SWEEPS)
}

pub fn sym_eig_with(s: &DenseMatrix, max_sweeps: usize) -> Result<EigenDecomposition> {
    if !s.is_square() {
        return Err(Error::invalid(alloc::format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.all_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let fro = s.frobenius_norm();
    if s.asymmetry() > 1e-12 * fro {
        return Err(Error::invalid("matrix is not symmetric"));
    }
    let n = s.rows();
    let mut a = s.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let mut d: Vec<f64> = a.diag();
    let mut b = d.clone();
    let mut z = alloc::vec![0.0; n];

    let mut converged = n <= 1;
    for sweep in 1..=max_sweeps {
        if converged {
            break;
        }
        let mut off = 0.0;
        for q in 1..n {
            for p in 0..q {
                off += a[(p, q)].abs();
            }
        }
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 4 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[(p, q)] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + math::sqrt(1.0 + theta * theta));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let sn = t * c;
                let tau = sn / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[(p, q)] = 0.0;
                // Only the upper triangle of `a` is maintained.
                for j in 0..p {
                    rotate(&mut a, j, p, j, q, sn, tau);
                }
                for j in (p + 1)..q {
                    rotate(&mut a, p, j, j, q, sn, tau);
                }
                for j in (q + 1)..n {
                    rotate(&mut a, p, j, q, j, sn, tau);
                }
                for j in 0..n {
                    rotate(&mut v, j, p, j, q, sn, tau);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        return Err(Error::Convergence { what: "Jacobi eigenvalue sweeps".into(), iterations: max_sweeps });
    }

    // Stable sort keeps ties in sweep order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition { vectors, values })
}

#[inline]
fn rotate(m: &mut DenseMatrix, i: usize, j: usize, k: usize, l: usize, s: f64, tau: f64) {
    let g = m[(i, j)];
    let h = m[(k, l)];
    m[(i, j)] = g - s * (h + g * tau);
    m[(k, l)] = h + s * (g - h * tau);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_error(v: &DenseMatrix) -> f64 {
        let vtv = v.transpose().matmul(v).unwrap();
        vtv.sub(&DenseMatrix::identity(v.cols())).frobenius_norm()
    }

    #[test]
    fn diagonal_input() {
        let s = DenseMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let e = sym_eig(&s).unwrap();
        assert_eq!(e.values, alloc::vec![1.0, 2.0, 3.0]);
        let expected = DenseMatrix::from_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(e.vectors, expected);
    }

    #[test]
    fn swap_matrix() {
        let s = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = sym_eig(&s).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(orthonormality_error(&e.vectors) < 1e-14);
    }

    #[test]
    fn pseudo_random_reconstruction() {
        let n = 8;
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut s = DenseMatrix::from_fn(n, n, |_, _| next());
        s.symmetrize();
        let e = sym_eig(&s).unwrap();
        let err = e.reconstruct().sub(&s).frobenius_norm();
        assert!(err <= 1e-10 * (1.0 + s.frobenius_norm()), "{err}");
        assert!(orthonormality_error(&e.vectors) <= 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_bad_input() {
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(sym_eig(&rect), Err(Error::InvalidInput(_))));
        let asym = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(sym_eig(&asym), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sweep_cap_reports_convergence_error() {
        let s = DenseMatrix::from_rows(&[&[1.0, 0.5, 0.2], &[0.5, 2.0, 0.3], &[0.2, 0.3, 3.0]]);
        assert!(matches!(sym_eig_with(&s, 1), Err(Error::Convergence { .. })));
    }
}
