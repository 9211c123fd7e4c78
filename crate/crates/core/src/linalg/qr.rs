use alloc::vec;
use alloc::vec::Vec;

use super::{vector, DenseMatrix};
use crate::error::{Error, Result};
use crate::math;

/// A solution of `A x = b` with at most `rows(A)` nonzeros.
///
/// Householder QR with column pivoting selects `rows(A)` independent columns
/// `B`; the returned vector solves `A_B x_B = b` and is zero elsewhere. `A`
/// must have full row rank.
pub fn basic_solution(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (a.rows(), a.cols());
    if b.len() != n {
        return Err(Error::invalid(alloc::format!("rhs has length {}, expected {n}", b.len())));
    }
    if n > p {
        return Err(Error::RankDeficient(alloc::format!("{n}x{p} matrix cannot have full row rank")));
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut col_norms: Vec<f64> = (0..p).map(|j| vector::norm_sq(r.col(j))).collect();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for k in 0..n {
        // pivot: largest remaining column norm (recomputed exactly to avoid downdating drift)
        for j in k..p {
            col_norms[j] = vector::norm_sq(&r.col(j)[k..]);
        }
        let (piv, best) = (k..p)
            .map(|j| (j, col_norms[j]))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if math::sqrt(best) <= 1e-12 * scale * math::sqrt(n as f64) {
            return Err(Error::RankDeficient(alloc::format!("rank {k} < {n} rows")));
        }
        if piv != k {
            for i in 0..n {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, piv)];
                r[(i, piv)] = t;
            }
            perm.swap(k, piv);
            col_norms.swap(k, piv);
        }
        // Householder reflector zeroing r[k+1.., k]
        let alpha = {
            let x = &r.col(k)[k..];
            let norm = vector::norm2(x);
            if x[0] > 0.0 {
                -norm
            } else {
                norm
            }
        };
        let mut v: Vec<f64> = r.col(k)[k..].to_vec();
        v[0] -= alpha;
        let vnorm_sq = vector::norm_sq(&v);
        if vnorm_sq > 0.0 {
            for j in k..p {
                let col = &mut r.col_mut(j)[k..];
                let c = 2.0 * vector::dot(&v, col) / vnorm_sq;
                vector::axpy(-c, &v, col);
            }
            let c = 2.0 * vector::dot(&v, &rhs[k..]) / vnorm_sq;
            vector::axpy(-c, &v, &mut rhs[k..]);
        }
    }
    // back substitution with the leading n x n upper triangle
    let mut xb = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..n {
            s -= r[(i, j)] * xb[j];
        }
        xb[i] = s / r[(i, i)];
    }
    let mut x = vec![0.0; p];
    for (k, v) in xb.into_iter().enumerate() {
        x[perm[k]] = v;
    }
    Ok(x)
}
