use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DenseMatrix};
use crate::math;

/// The positive root of `rho t^2 - rho lambda t - 1 = 0`.
pub fn logdet_prox_eigenvalue(lambda: f64, rho: f64) -> f64 {
    let root = math::sqrt(lambda * lambda + 4.0 / rho);
    if lambda >= 0.0 {
        0.5 * (lambda + root)
    } else {
        // same value without cancellation
        (2.0 / rho) / (root - lambda)
    }
}

/// `argmin_X -log det X + (rho / 2) ||X - C||_F^2` over positive definite `X`.
///
/// With `C = V diag(lambda) V^T`, the minimizer is `V diag(t) V^T` where
/// `t_i = (lambda_i + sqrt(lambda_i^2 + 4 / rho)) / 2`.
pub fn logdet_prox(c: &DenseMatrix, rho: f64) -> Result<DenseMatrix> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid(alloc::format!("prox parameter must be positive, got {rho}")));
    }
    let eig = sym_eig(c)?;
    let mut x = eig.reconstruct_with(|l| logdet_prox_eigenvalue(l, rho));
    x.symmetrize();
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Cholesky;

    #[test]
    fn identity_input() {
        let x = logdet_prox(&DenseMatrix::identity(2), 4.0).unwrap();
        let t = (1.0 + 2f64.sqrt()) / 2.0;
        assert!(x.sub(&DenseMatrix::identity(2).scaled(t)).max_abs() < 1e-14);
        assert!((t - 1.20711).abs() < 1e-5);
    }

    #[test]
    fn zero_input() {
        let x = logdet_prox(&DenseMatrix::zeros(3, 3), 1.0).unwrap();
        assert!(x.sub(&DenseMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_identity() {
        for &rho in &[0.1, 1.0, 10.0, 1e6] {
            for &l in &[-1e4, -3.0, -1e-3, 0.0, 0.5, 7.0, 1e4] {
                let t = logdet_prox_eigenvalue(l, rho);
                assert!(t > 0.0);
                let scale = 1.0 + rho * t * t + (rho * l * t).abs();
                assert!((rho * t * t - rho * l * t - 1.0).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn stationarity_on_small_matrix() {
        let c = DenseMatrix::from_rows(&[&[1.0, -2.0, 0.5], &[-2.0, 0.0, 1.0], &[0.5, 1.0, -3.0]]);
        let rho = 0.7;
        let x = logdet_prox(&c, rho).unwrap();
        let mut res = Cholesky::factor(&x).unwrap().inverse().scaled(-1.0);
        res.add_scaled(rho, &x.sub(&c));
        assert!(res.frobenius_norm() <= 1e-10 * (1.0 + rho * c.frobenius_norm()));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let c = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(logdet_prox(&c, 1.0).is_err());
        assert!(logdet_prox(&DenseMatrix::identity(2), 0.0).is_err());
    }
}
