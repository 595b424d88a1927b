//! Truncated-SVD least squares for tall complex systems.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub struct LeastSquares {
    pub solution: DVector<Complex64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Minimise `‖A x - b‖` keeping singular values above `rel_cutoff · σ_max`.
///
/// A Householder QR reduces the system to its square triangular factor
/// first; the SVD of `R` has the same singular values and right vectors as
/// that of `A`.
pub fn truncated_lstsq(
    a: DMatrix<Complex64>,
    b: &DVector<Complex64>,
    rel_cutoff: f64,
) -> Result<LeastSquares> {
    let (rows, cols) = a.shape();
    if cols == 0 || rows < cols {
        return Err(Error::Singular(format!("system shape {rows}x{cols}")));
    }
    let qr = a.qr();
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let rhs = qtb.rows(0, cols).into_owned();
    let svd = SVD::try_new(r, true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Singular("SVD did not converge".into()))?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if !(smax > 0.0 && smax.is_finite()) {
        return Err(Error::Singular(format!("largest singular value {smax}")));
    }
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let utb = u.adjoint() * rhs;
    let mut x = DVector::<Complex64>::zeros(cols);
    let mut rank = 0;
    for (k, &s) in sigma.iter().enumerate() {
        if s > rel_cutoff * smax {
            rank += 1;
            let coef = utb[k] / s;
            for j in 0..cols {
                x[j] += v_t[(k, j)].conj() * coef;
            }
        }
    }
    Ok(LeastSquares {
        solution: x,
        rank,
        singular_values: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_consistent_system() {
        let a = DMatrix::from_fn(6, 3, |i, j| {
            Complex64::new(((i + 1) as f64).powi(j as i32), (i * j * j) as f64 * 0.3)
        });
        let x = DVector::from_vec(vec![
            Complex64::new(1.0, -1.0),
            Complex64::new(0.5, 2.0),
            Complex64::new(-3.0, 0.0),
        ]);
        let b = &a * &x;
        let ls = truncated_lstsq(a, &b, 1e-12).unwrap();
        assert_eq!(ls.rank, 3);
        assert!((ls.solution - x).norm() < 1e-10);
    }

    #[test]
    fn truncates_dependent_columns() {
        let a = DMatrix::from_fn(5, 2, |i, _| Complex64::new(i as f64 + 1.0, 0.0));
        let b = DVector::from_fn(5, |i, _| Complex64::new(2.0 * (i as f64 + 1.0), 0.0));
        let ls = truncated_lstsq(a, &b, 1e-12).unwrap();
        assert_eq!(ls.rank, 1);
        assert!((ls.solution[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((ls.solution[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
