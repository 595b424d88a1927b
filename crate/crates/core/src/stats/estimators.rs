//! Direct-sampling moment estimators at the surface nodes.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::surface::{FourierSurface, Surface};

/// Coefficient-wise mean of an ensemble of equal-bandwidth surfaces.
pub fn mean_coeffs(ensemble: &[FourierSurface]) -> Result<FourierSurface> {
    let Some(first) = ensemble.first() else {
        return config("mean of an empty ensemble");
    };
    let n = first.coeffs().len();
    let mut sum = vec![0.0; n];
    for s in ensemble {
        if s.coeffs().len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: s.coeffs().len(),
            });
        }
        for (a, b) in sum.iter_mut().zip(s.coeffs()) {
            *a += b;
        }
    }
    let m = ensemble.len() as f64;
    FourierSurface::new(sum.into_iter().map(|v| v / m).collect())
}

/// Evaluate each surface at `xs`; one row per surface.
pub fn node_matrix<S: Surface>(ensemble: &[S], xs: &[f64]) -> Vec<Vec<f64>> {
    ensemble.iter().map(|s| s.heights(xs)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMoments {
    pub mean: Vec<f64>,
    /// `(1/M) Σ_m (f_m(x_i) - mean_i)²`.
    pub variance: Vec<f64>,
}

/// Sample mean and diagonal covariance over the rows of `samples`.
pub fn covariance_diag(samples: &[Vec<f64>]) -> Result<NodeMoments> {
    let Some(first) = samples.first() else {
        return config("covariance of an empty ensemble");
    };
    let n = first.len();
    if let Some(bad) = samples.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let m = samples.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|i| samples.iter().map(|r| r[i]).sum::<f64>() / m)
        .collect();
    let variance = (0..n)
        .map(|i| {
            samples
                .iter()
                .map(|r| (r[i] - mean[i]).powi(2))
                .sum::<f64>()
                / m
        })
        .collect();
    Ok(NodeMoments { mean, variance })
}

/// Squared intensity `h²(x_i) = c_ii / Δx`.
pub fn intensity_estimate(variance: &[f64], spacing: f64) -> Vec<f64> {
    variance.iter().map(|c| c / spacing).collect()
}
