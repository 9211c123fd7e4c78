use super::{vector, DenseMatrix};
use crate::error::{Error, Result};

/// Gram-Schmidt on the rows of `m` with one reorthogonalization pass.
///
/// Returns `G` with `G G^T = I` spanning the row space of `m`.
pub fn orthonormalize_rows(m: &DenseMatrix) -> Result<DenseMatrix> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows > cols {
        return Err(Error::RankDeficient(alloc::format!("{rows} rows cannot be independent in dimension {cols}")));
    }
    let mut basis: alloc::vec::Vec<alloc::vec::Vec<f64>> = alloc::vec::Vec::with_capacity(rows);
    for i in 0..rows {
        let mut r = m.row(i);
        let original = vector::norm2(&r);
        for _ in 0..2 {
            for q in &basis {
                let c = vector::dot(q, &r);
                vector::axpy(-c, q, &mut r);
            }
        }
        let norm = vector::norm2(&r);
        if !(norm > 1e-10 * original) || norm == 0.0 {
            return Err(Error::RankDeficient(alloc::format!("row {i} is (numerically) dependent on earlier rows")));
        }
        vector::scale(1.0 / norm, &mut r);
        basis.push(r);
    }
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| basis[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ggt_error(g: &DenseMatrix) -> f64 {
        g.gram_rows().sub(&DenseMatrix::identity(g.rows())).frobenius_norm()
    }

    #[test]
    fn already_orthonormal() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let m = DenseMatrix::from_rows(&[&[s, s, 0.0], &[0.0, 0.0, 1.0]]);
        let g = orthonormalize_rows(&m).unwrap();
        assert!(ggt_error(&g) < 1e-15);
        assert!(g.sub(&m).max_abs() < 1e-15);
    }

    #[test]
    fn removes_scaling() {
        let m = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let g = orthonormalize_rows(&m).unwrap();
        assert_eq!(g, DenseMatrix::identity(2));
    }

    #[test]
    fn dependent_rows_fail() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        assert!(matches!(orthonormalize_rows(&m), Err(Error::RankDeficient(_))));
        let tall = DenseMatrix::zeros(3, 2);
        assert!(orthonormalize_rows(&tall).is_err());
    }
}
