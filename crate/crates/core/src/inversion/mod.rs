//! Shape reconstruction of a single surface from multi-angle field data.
//!
//! Measured fields are expanded in Rayleigh orders `|n| ≤ N`, continued back
//! down to the unknown surface through regularised coefficients, and the
//! surface is fitted by minimising the boundary residual of the total field
//! over a truncated Fourier parametrisation.

mod objective;

pub use objective::{Objective, ObjectiveModel};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::forward::dataset::{ScatterDataset, Stage};
use crate::forward::{field_coefficients, FieldSamples};
use crate::surface::FourierSurface;
use crate::waves::{ModeSet, PlaneWave};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    /// `c ← c - η Σ_l ∇J_l`.
    SummedGradient,
    /// `c ← c - η Σ_l J_l ∇J_l`, i.e. `DJᵀ J` with `J` the vector of
    /// per-angle objectives.
    ResidualWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionOptions {
    /// Rayleigh orders `|n| ≤ truncation` kept from the data.
    pub truncation: usize,
    /// Tikhonov parameter for the evanescent continuation.
    pub gamma: f64,
    pub quadrature: usize,
    pub iterations: usize,
    /// Step size per stage is `step_scale / κ`.
    pub step_scale: f64,
    pub rule: UpdateRule,
    /// Stop a stage early once the gradient of the summed objective falls
    /// below this in the max norm.
    pub stop_tolerance: Option<f64>,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            truncation: 8,
            gamma: 1e-6,
            quadrature: 256,
            iterations: 50,
            step_scale: 1e-3,
            rule: UpdateRule::SummedGradient,
            stop_tolerance: None,
        }
    }
}

impl InversionOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return config("Tikhonov parameter must be positive");
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return config("step scale must be positive");
        }
        if self.quadrature < 8 {
            return config("quadrature needs at least 8 points");
        }
        Ok(())
    }
}

/// Trapezoid coefficients `u_n` of a measured line field, `|n| ≤ truncation`.
pub fn fourier_data_coeffs(
    field: &FieldSamples,
    truncation: usize,
) -> Result<(ModeSet, Vec<Complex64>)> {
    let modes = ModeSet::allowing_grazing(field.wave()?, truncation);
    let u = field_coefficients(field, &modes);
    Ok((modes, u))
}

/// Modal coefficients `φ_n = -i β_n u_n exp(-i β_n y0)` of the equivalent
/// surface density.
pub fn density_coeffs(u: &[Complex64], modes: &ModeSet, y0: f64) -> Vec<Complex64> {
    u.iter()
        .zip(&modes.modes)
        .map(|(u, m)| -I * m.beta * u * (-I * m.beta * y0).exp())
        .collect()
}

/// Downward-continued coefficients: `u_n exp(-i β_n y0)` for propagating
/// orders and the Tikhonov-damped `u_n exp(i β_n y0) / (exp(2 i β_n y0) + γ)`
/// for evanescent ones.
pub fn psi_coeffs(u: &[Complex64], modes: &ModeSet, y0: f64, gamma: f64) -> Vec<Complex64> {
    u.iter()
        .zip(&modes.modes)
        .map(|(u, m)| {
            if m.is_propagating() {
                u * (-I * m.beta * y0).exp()
            } else {
                let decay = (I * m.beta * y0).exp();
                u * decay / (decay * decay + gamma)
            }
        })
        .collect()
}

/// Data for one incidence, ready for the objective.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub wave: PlaneWave,
    pub y0: f64,
    pub modes: ModeSet,
    pub coefficients: Vec<Complex64>,
    pub psi: Vec<Complex64>,
}

impl SpectralData {
    pub fn from_field(field: &FieldSamples, truncation: usize, gamma: f64) -> Result<Self> {
        let (modes, u) = fourier_data_coeffs(field, truncation)?;
        let psi = psi_coeffs(&u, &modes, field.y0, gamma);
        Ok(SpectralData {
            wave: modes.wave,
            y0: field.y0,
            modes,
            coefficients: u,
            psi,
        })
    }
}

/// Spectral data for sample `m`, stage `stage`, every angle.
pub fn sample_spectra(
    dataset: &ScatterDataset,
    m: usize,
    stage: usize,
    opts: &InversionOptions,
) -> Result<Vec<SpectralData>> {
    (0..dataset.plan().angles.len())
        .map(|l| {
            SpectralData::from_field(
                &dataset.record(m, stage, l).samples(),
                opts.truncation,
                opts.gamma,
            )
        })
        .collect()
}

/// One Landweber iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub coeffs: Vec<f64>,
}

/// Run Landweber iterations from `init`, reporting every iterate (including
/// the starting point) to `observe`.
pub fn landweber(
    model: &ObjectiveModel,
    init: &FourierSurface,
    step: f64,
    iterations: usize,
    rule: UpdateRule,
    stop_tolerance: Option<f64>,
    mut observe: impl FnMut(&IterationRecord),
) -> Result<FourierSurface> {
    let mut c = init.with_bandwidth(model.bandwidth());
    for t in 0..=iterations {
        let (obj, grads) = model.gradient(&c)?;
        if !obj.total.is_finite() || grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { iteration: t });
        }
        observe(&IterationRecord {
            iteration: t,
            objective: obj.total,
            coeffs: c.coeffs().to_vec(),
        });
        if t == iterations {
            break;
        }
        if let Some(tol) = stop_tolerance {
            let steepest = (0..c.coeffs().len())
                .map(|p| grads.iter().map(|g| g[p]).sum::<f64>().abs())
                .fold(0.0, f64::max);
            if steepest < tol {
                break;
            }
        }
        let coeffs = c.coeffs_mut();
        for (l, g) in grads.iter().enumerate() {
            let w = match rule {
                UpdateRule::SummedGradient => 1.0,
                UpdateRule::ResidualWeighted => obj.per_angle[l],
            };
            for (cp, gp) in coeffs.iter_mut().zip(g) {
                *cp -= step * w * gp;
            }
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration: t + 1 });
        }
    }
    Ok(c)
}

/// Frequency continuation: each stage starts from the previous result,
/// zero-padded to the stage bandwidth. `observe` receives the stage index
/// with every iterate.
pub fn continuation_invert(
    stages: &[(Stage, Vec<SpectralData>)],
    init: &FourierSurface,
    opts: &InversionOptions,
    mut observe: impl FnMut(usize, &IterationRecord),
) -> Result<FourierSurface> {
    opts.validate()?;
    let mut c = init.clone();
    for (j, (stage, spectra)) in stages.iter().enumerate() {
        let model = ObjectiveModel::new(spectra, stage.bandwidth, opts.quadrature)?;
        c = landweber(
            &model,
            &c,
            opts.step_scale / stage.kappa,
            opts.iterations,
            opts.rule,
            opts.stop_tolerance,
            |rec| observe(j, rec),
        )?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::periodic_grid;

    fn flat_field(kappa: f64, theta: f64, height: f64, y0: f64) -> FieldSamples {
        let w = PlaneWave::new(kappa, theta).unwrap();
        let values = periodic_grid(256)
            .into_iter()
            .map(|x| -(I * (w.alpha * x + w.beta * (y0 - 2.0 * height))).exp())
            .collect();
        FieldSamples {
            kappa,
            theta,
            y0,
            values,
        }
    }

    #[test]
    fn flat_data_has_single_specular_order() {
        let f = flat_field(2.0, 0.0, 1.0, 2.0);
        let (modes, u) = fourier_data_coeffs(&f, 8).unwrap();
        for (m, c) in modes.modes.iter().zip(&u) {
            if m.order == 0 {
                assert!((c - Complex64::new(-1.0, 0.0)).norm() < 1e-13);
            } else {
                assert!(c.norm() < 1e-13);
            }
        }
        let phi = density_coeffs(&u, &modes, 2.0);
        let want = -I * 2.0 * -(-I * 4.0).exp();
        assert!((phi[modes.index(0)] - want).norm() < 1e-12);
    }

    #[test]
    fn flat_residual_vanishes_at_true_height() {
        let spectra: Vec<_> = [-0.5, 0.0, 0.7]
            .iter()
            .map(|&t| SpectralData::from_field(&flat_field(2.0, t, 1.0, 2.0), 8, 1e-6).unwrap())
            .collect();
        let model = ObjectiveModel::new(&spectra, 2, 256).unwrap();
        let obj = model.evaluate(&FourierSurface::flat(1.0, 2)).unwrap();
        assert!(obj.total < 1e-10, "{}", obj.total);
        let off = model.evaluate(&FourierSurface::flat(1.2, 2)).unwrap();
        assert!(off.total > 1e-2);
    }

    #[test]
    fn landweber_recovers_flat_height() {
        let spectra: Vec<_> = [-0.5, 0.0, 0.7]
            .iter()
            .map(|&t| SpectralData::from_field(&flat_field(2.0, t, 1.0, 2.0), 8, 1e-6).unwrap())
            .collect();
        let model = ObjectiveModel::new(&spectra, 1, 256).unwrap();
        let mut history = Vec::new();
        let c = landweber(
            &model,
            &FourierSurface::flat(1.3, 1),
            5e-4,
            40,
            UpdateRule::SummedGradient,
            None,
            |r| history.push(r.objective),
        )
        .unwrap();
        assert!((c.coeffs()[0] - 1.0).abs() < 1e-3, "{:?}", c.coeffs());
        assert!(history.windows(2).all(|w| w[1] <= w[0]), "{history:?}");
        assert_eq!(history.len(), 41);
    }

    #[test]
    fn gradient_stop_ends_at_a_stationary_point() {
        let spectra: Vec<_> = [-0.5, 0.0, 0.7]
            .iter()
            .map(|&t| SpectralData::from_field(&flat_field(2.0, t, 1.0, 2.0), 8, 1e-6).unwrap())
            .collect();
        let model = ObjectiveModel::new(&spectra, 1, 256).unwrap();
        let mut seen = 0;
        let rule = UpdateRule::SummedGradient;
        let truth = FourierSurface::flat(1.0, 1);
        landweber(&model, &truth, 5e-4, 40, rule, Some(1e-6), |_| seen += 1).unwrap();
        assert_eq!(seen, 1);
        seen = 0;
        landweber(&model, &FourierSurface::flat(1.3, 1), 5e-4, 5, rule, Some(1e-6), |_| seen += 1)
            .unwrap();
        assert_eq!(seen, 6);
    }

    #[test]
    fn evanescent_continuation_is_damped() {
        let w = PlaneWave::new(2.0, 0.0).unwrap();
        let modes = ModeSet::allowing_grazing(w, 8);
        let u = vec![Complex64::new(1.0, 0.0); modes.len()];
        let psi = psi_coeffs(&u, &modes, 3.0, 1e-6);
        for (m, p) in modes.modes.iter().zip(&psi) {
            if !m.is_propagating() {
                assert!(p.norm() <= 1.0 / (2.0 * 1e-6f64.sqrt()) + 1e-9);
            }
        }
    }
}
