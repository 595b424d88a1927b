#![allow(dead_code)]

use num_complex::Complex64;
use random_grating::config::RunConfig;
use random_grating::forward::dataset::{generate_dataset, ScatterDataset};
use random_grating::forward::FieldSamples;
use random_grating::inversion::SpectralData;
use random_grating::surface::{periodic_grid, sample_realization_where, SurfaceRealization};
use random_grating::waves::PlaneWave;

pub fn config(json: &str) -> RunConfig {
    RunConfig::from_json_overrides(json, None).unwrap()
}

/// Noise-free flat-surface field at `height`, measured at `y0`.
pub fn flat_field(kappa: f64, theta: f64, height: f64, y0: f64) -> FieldSamples {
    let w = PlaneWave::new(kappa, theta).unwrap();
    let values = periodic_grid(256)
        .into_iter()
        .map(|x| -(Complex64::new(0.0, w.alpha * x + w.beta * (y0 - 2.0 * height))).exp())
        .collect();
    FieldSamples { kappa, theta, y0, values }
}

pub fn flat_spectra(kappa: f64, angles: &[f64], height: f64, y0: f64) -> Vec<SpectralData> {
    angles
        .iter()
        .map(|&t| SpectralData::from_field(&flat_field(kappa, t, height, y0), 8, 1e-6).unwrap())
        .collect()
}

/// A one-sample dataset for `cfg` together with the realization behind it.
pub fn single_sample(cfg: &RunConfig) -> (ScatterDataset, SurfaceRealization) {
    let mut plan = cfg.plan().unwrap();
    plan.samples = 1;
    let (ds, _) = generate_dataset(&plan, 0).unwrap();
    let truth = sample_realization_where(&plan.model, plan.seed, 0, |r| r.max_height() < plan.y0).unwrap();
    (ds, truth)
}
