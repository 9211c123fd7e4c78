use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseMatrix};

/// Euclidean projection onto `{x : A x = b}` for `A` with full row rank.
///
/// `A A^T` is factored once at construction.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    a: DenseMatrix,
    b: Vec<f64>,
    gram: Cholesky,
}

impl AffineProjector {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::invalid(alloc::format!("rhs has length {}, expected {}", b.len(), a.rows())));
        }
        if !crate::linalg::vector::all_finite(&b) {
            return Err(Error::invalid("rhs has non-finite entries"));
        }
        let g = a.gram_rows();
        let gram =
            Cholesky::factor(&g).map_err(|e| Error::RankDeficient(alloc::format!("A A^T is not positive definite ({e})")))?;
        let scale = g.diag().into_iter().fold(0.0, f64::max);
        if let Some(i) = gram.factor_l().diag().iter().position(|l| l * l <= 1e-13 * scale) {
            return Err(Error::RankDeficient(alloc::format!("row {i} of A is numerically dependent on earlier rows")));
        }
        Ok(Self { a, b, gram })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// `A x - b`
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        r
    }

    /// `c - A^T (A A^T)^{-1} (A c - b)`, followed by one refinement pass.
    pub fn project(&self, c: &[f64]) -> Vec<f64> {
        let mut x = c.to_vec();
        self.project_in_place(&mut x);
        x
    }

    pub fn project_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        let mut correction = vec![0.0; x.len()];
        for _ in 0..2 {
            let mut r = self.residual(x);
            self.gram.solve_in_place(&mut r);
            self.a.t_mul_vec_into(&r, &mut correction);
            for (xi, ci) in x.iter_mut().zip(&correction) {
                *xi -= ci;
            }
        }
    }
}
