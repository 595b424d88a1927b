//! Random periodic grating model: mean profile plus intensity-weighted
//! Gaussian perturbations on a uniform node grid, tent-interpolated between
//! nodes.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{config, Error, Result};
use crate::profile::{wrap, ProfileSpec};
use crate::rng;

/// Smallest admissible node spacing.
pub const MIN_NODE_SPACING: f64 = 0.004;

/// A height function over one period.
pub trait Surface: Sync {
    fn height(&self, x: f64) -> f64;

    fn heights(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.height(x)).collect()
    }
}

impl Surface for ProfileSpec {
    fn height(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

/// Uniform periodic grid `x_k = 2π k / n`.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Discrete L² norm over one period of values sampled on a uniform periodic
/// grid (the duplicated endpoint must not be included).
pub fn l2_norm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return config("l2_norm of an empty sample vector");
    }
    let dx = TAU / values.len() as f64;
    Ok((dx * values.iter().map(|v| v * v).sum::<f64>()).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceModel {
    pub mean: ProfileSpec,
    pub intensity: ProfileSpec,
    pub nodes: usize,
    /// Ratio bound `c` in `‖f - g‖ ≤ c ‖g‖`.
    #[serde(default = "default_amplitude_ratio")]
    pub amplitude_ratio: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
}

fn default_amplitude_ratio() -> f64 {
    0.9
}

fn default_max_retries() -> u32 {
    1000
}

impl SurfaceModel {
    pub fn new(mean: ProfileSpec, intensity: ProfileSpec, nodes: usize) -> Result<Self> {
        let model = SurfaceModel {
            mean,
            intensity,
            nodes,
            amplitude_ratio: default_amplitude_ratio(),
            max_retries: default_max_retries(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.mean.validate()?;
        self.intensity.validate()?;
        if self.nodes < 2 {
            return config(format!("need at least 2 nodes, got {}", self.nodes));
        }
        if self.node_spacing() < MIN_NODE_SPACING {
            return config(format!(
                "node spacing {:.4e} below the minimum {MIN_NODE_SPACING}",
                self.node_spacing()
            ));
        }
        if !(self.amplitude_ratio > 0.0 && self.amplitude_ratio < 1.0) {
            return config("amplitude ratio must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn node_spacing(&self) -> f64 {
        TAU / self.nodes as f64
    }

    /// Node abscissae `x_0..=x_N`, including the duplicated endpoint `2π`.
    pub fn node_positions(&self) -> Vec<f64> {
        let dx = self.node_spacing();
        (0..=self.nodes).map(|i| i as f64 * dx).collect()
    }

    /// Upper bound used to place the measurement line: the largest value of
    /// `g + 3 |h| √Δx` over the nodes and a fine grid.
    pub fn three_sigma_envelope(&self) -> f64 {
        let sd = self.node_spacing().sqrt();
        let env = |x: f64| self.mean.eval(x) + 3.0 * self.intensity.eval(x).abs() * sd;
        let fine = (0..4096).map(|k| env(TAU * k as f64 / 4096.0));
        let nodes = self.node_positions().into_iter().map(env);
        fine.chain(nodes).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One sampled surface, stored by its node heights `f_0..=f_N` with
/// `f_N = f_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRealization {
    pub index: u64,
    pub node_values: Vec<f64>,
    /// Number of candidate draws rejected before this one was accepted.
    pub rejected: u32,
}

impl SurfaceRealization {
    pub fn nodes(&self) -> usize {
        self.node_values.len() - 1
    }

    pub fn max_height(&self) -> f64 {
        self.node_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_height(&self) -> f64 {
        self.node_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

impl Surface for SurfaceRealization {
    fn height(&self, x: f64) -> f64 {
        let n = self.nodes();
        let pos = wrap(x) / TAU * n as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let w = pos - i as f64;
        self.node_values[i] * (1.0 - w) + self.node_values[i + 1] * w
    }
}

/// Draw realization `m` of `model` from the stream derived from `seed`.
pub fn sample_realization(model: &SurfaceModel, seed: u64, m: u64) -> Result<SurfaceRealization> {
    sample_realization_where(model, seed, m, |_| true)
}

/// As [`sample_realization`], additionally rejecting candidates for which
/// `accept` returns false. Both rejection kinds share the retry budget.
pub fn sample_realization_where(
    model: &SurfaceModel,
    seed: u64,
    m: u64,
    accept: impl Fn(&SurfaceRealization) -> bool,
) -> Result<SurfaceRealization> {
    model.validate()?;
    let n = model.nodes;
    let dx = model.node_spacing();
    let sd = dx.sqrt();
    let xs = model.node_positions();
    let mean: Vec<f64> = xs.iter().map(|&x| model.mean.eval(x)).collect();
    let weight: Vec<f64> = xs.iter().map(|&x| model.intensity.eval(x) * sd).collect();
    let mean_norm = l2_norm(&mean[..n])?;
    let check_amplitude = mean_norm > 1e-9;

    let mut stream = rng::stream(seed, &[rng::DOMAIN_SURFACE, m]);
    let mut rejected = 0u32;
    loop {
        let mut xi: Vec<f64> = (0..n).map(|_| rng::standard_normal(&mut stream)).collect();
        xi.push(xi[0]);
        let node_values: Vec<f64> = (0..=n).map(|i| mean[i] + weight[i] * xi[i]).collect();
        let candidate = SurfaceRealization {
            index: m,
            node_values,
            rejected,
        };
        let amplitude_ok = !check_amplitude || {
            let dev: Vec<f64> = (0..n).map(|i| candidate.node_values[i] - mean[i]).collect();
            l2_norm(&dev)? <= model.amplitude_ratio * mean_norm
        };
        if amplitude_ok && accept(&candidate) {
            return Ok(candidate);
        }
        rejected += 1;
        if rejected > model.max_retries {
            return Err(Error::AmplitudeAssumption {
                sample: m,
                retries: model.max_retries,
            });
        }
    }
}

/// Truncated real Fourier series
/// `c_0 + Σ_{p=1..k} c_{2p-1} cos(p x) + c_{2p} sin(p x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourierSurface {
    coeffs: Vec<f64>,
}

/// Basis function `p` of the real Fourier series.
pub fn fourier_basis(p: usize, x: f64) -> f64 {
    if p == 0 {
        1.0
    } else {
        let freq = p.div_ceil(2) as f64;
        if p % 2 == 1 {
            (freq * x).cos()
        } else {
            (freq * x).sin()
        }
    }
}

impl FourierSurface {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return config(format!(
                "Fourier coefficient vector must have odd length, got {}",
                coeffs.len()
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return config("non-finite Fourier coefficient");
        }
        Ok(FourierSurface { coeffs })
    }

    pub fn flat(height: f64, bandwidth: usize) -> Self {
        let mut coeffs = vec![0.0; 2 * bandwidth + 1];
        coeffs[0] = height;
        FourierSurface { coeffs }
    }

    pub fn bandwidth(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Zero-pad (or truncate) to a different bandwidth.
    pub fn with_bandwidth(&self, bandwidth: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(2 * bandwidth + 1, 0.0);
        FourierSurface { coeffs }
    }
}

impl Surface for FourierSurface {
    fn height(&self, x: f64) -> f64 {
        let x = wrap(x);
        let mut sum = self.coeffs[0];
        for p in 1..=self.bandwidth() {
            let (s, c) = (p as f64 * x).sin_cos();
            sum += self.coeffs[2 * p - 1] * c + self.coeffs[2 * p] * s;
        }
        sum
    }
}

/// Project `profile` onto bandwidth `k_max` with the periodic trapezoid rule
/// on `quadrature` points.
pub fn fourier_project(
    profile: &dyn Surface,
    k_max: usize,
    quadrature: usize,
) -> Result<FourierSurface> {
    if quadrature < 2 * k_max + 1 {
        return config(format!(
            "{quadrature} quadrature points cannot resolve bandwidth {k_max}"
        ));
    }
    let xs = periodic_grid(quadrature);
    let fs = profile.heights(&xs);
    let coeffs = (0..=2 * k_max)
        .map(|p| {
            let scale = if p == 0 { 1.0 } else { 2.0 } / quadrature as f64;
            scale
                * xs.iter()
                    .zip(&fs)
                    .map(|(&x, f)| f * fourier_basis(p, x))
                    .sum::<f64>()
        })
        .collect();
    FourierSurface::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Phase;

    fn ex1_model() -> SurfaceModel {
        SurfaceModel::new(
            ProfileSpec::zero(),
            ProfileSpec::cosines(0.0, &[(1.0, 1)]),
            80,
        )
        .unwrap()
    }

    #[test]
    fn l2_norm_of_constant() {
        let v = vec![1.0; 37];
        assert!((l2_norm(&v).unwrap() - TAU.sqrt()).abs() < 1e-14);
        assert!(l2_norm(&[]).is_err());
    }

    #[test]
    fn realization_is_periodic_and_interpolates_nodes() {
        let model = ex1_model();
        let r = sample_realization(&model, 3, 5).unwrap();
        assert_eq!(r.node_values.len(), 81);
        assert_eq!(r.node_values[0], r.node_values[80]);
        assert_eq!(r.height(0.0), r.height(TAU));
        let dx = model.node_spacing();
        for i in [0usize, 7, 40, 79] {
            assert!((r.height(i as f64 * dx) - r.node_values[i]).abs() < 1e-12);
        }
        let mid = r.height(2.5 * dx);
        assert!((mid - 0.5 * (r.node_values[2] + r.node_values[3])).abs() < 1e-12);
    }

    #[test]
    fn zero_intensity_gives_mean_exactly() {
        let g = ProfileSpec::cosines(1.5, &[(0.2, 1), (0.2, 2)]);
        let model = SurfaceModel::new(g.clone(), ProfileSpec::zero(), 110).unwrap();
        let r = sample_realization(&model, 9, 0).unwrap();
        for (i, x) in model.node_positions().into_iter().enumerate() {
            assert_eq!(r.node_values[i], g.eval(x));
        }
    }

    #[test]
    fn sampling_is_deterministic_per_index() {
        let model = ex1_model();
        let a = sample_realization(&model, 42, 17).unwrap();
        let b = sample_realization(&model, 42, 17).unwrap();
        let c = sample_realization(&model, 42, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.node_values, c.node_values);
    }

    #[test]
    fn amplitude_bound_exhaustion_is_reported() {
        let mut model =
            SurfaceModel::new(ProfileSpec::constant(0.01), ProfileSpec::constant(5.0), 40).unwrap();
        model.max_retries = 20;
        match sample_realization(&model, 1, 0) {
            Err(Error::AmplitudeAssumption { retries: 20, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spacing_guard() {
        assert!(SurfaceModel::new(ProfileSpec::zero(), ProfileSpec::zero(), 1600).is_err());
        assert!(SurfaceModel::new(ProfileSpec::zero(), ProfileSpec::zero(), 1).is_err());
        assert!(SurfaceModel::new(ProfileSpec::zero(), ProfileSpec::zero(), 160).is_ok());
    }

    #[test]
    fn projection_of_trig_polynomial_is_exact() {
        let g = ProfileSpec::trig(
            1.5,
            [
                (0.2, 1, Phase::Cos),
                (0.2, 2, Phase::Cos),
                (-0.3, 2, Phase::Sin),
            ],
        );
        let c = fourier_project(&g, 2, 256).unwrap();
        let want = [1.5, 0.2, 0.0, 0.2, -0.3];
        for (a, b) in c.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let x = 0.77;
        assert!((c.height(x) - g.eval(x)).abs() < 1e-13);
    }

    #[test]
    fn zero_padding_preserves_values() {
        let c = FourierSurface::new(vec![1.0, 0.1, -0.2]).unwrap();
        let d = c.with_bandwidth(4);
        assert_eq!(d.coeffs().len(), 9);
        assert_eq!(c.height(1.3), d.height(1.3));
        assert!(FourierSurface::new(vec![1.0, 2.0]).is_err());
    }
}
