use alloc::vec::Vec;

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::math;

/// Lower-triangular Cholesky factor `S = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Only the lower triangle
    /// of `s` is read.
    pub fn factor(s: &DenseMatrix) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::invalid(alloc::format!(
                "Cholesky needs a square matrix, got {}x{}",
                s.rows(),
                s.cols()
            )));
        }
        let n = s.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut diag = s[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { row: j, pivot: diag });
            }
            let ljj = math::sqrt(diag);
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut v = s[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor_l(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves `S x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let l = &self.l;
        // L z = b
        for j in 0..n {
            b[j] /= l[(j, j)];
            let bj = b[j];
            let col = l.col(j);
            for i in (j + 1)..n {
                b[i] -= col[i] * bj;
            }
        }
        // L^T x = z
        for j in (0..n).rev() {
            let col = l.col(j);
            let mut v = b[j];
            for i in (j + 1)..n {
                v -= col[i] * b[i];
            }
            b[j] = v / col[j];
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_mat(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.dim() {
            return Err(Error::invalid(alloc::format!(
                "right-hand side has {} rows, expected {}",
                b.rows(),
                self.dim()
            )));
        }
        let mut x = b.clone();
        for j in 0..x.cols() {
            self.solve_in_place(x.col_mut(j));
        }
        Ok(x)
    }

    /// `log det S = 2 sum log L_ii`
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|d| math::ln(*d)).sum::<f64>()
    }

    pub fn inverse(&self) -> DenseMatrix {
        let mut inv = self.solve_mat(&DenseMatrix::identity(self.dim())).expect("square identity");
        inv.symmetrize();
        inv
    }
}

/// Solves `S X = B` for symmetric positive definite `S`.
pub fn cholesky_solve(s: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::factor(s)?.solve_mat(b)
}
