//! Run configuration and the built-in example presets.
//!
//! A configuration file is a JSON object whose keys override the fields of
//! the preset named by its `"preset"` key (or by `--preset`). Unknown keys
//! are rejected.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_3;

use crate::error::{config, Error, Result};
use crate::forward::dataset::{AcquisitionPlan, Stage};
use crate::forward::ForwardOptions;
use crate::profile::{ExpCosTerm, Phase, ProfileSpec};
use crate::stats::{McchOptions, SignPrior};
use crate::surface::SurfaceModel;

/// Default ceiling on the number of surface nodes accepted from a
/// configuration.
pub const MAX_CONFIG_NODES: usize = 160;

pub const PRESETS: [&str; 5] = ["ex1", "ex2", "ex3", "ex4", "ex5"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub mean: ProfileSpec,
    pub intensity: ProfileSpec,
    pub nodes: usize,
    pub stages: Vec<Stage>,
    pub angle_count: usize,
    /// Incidence angles are spread evenly over this closed interval.
    pub angle_range: [f64; 2],
    pub samples: usize,
    pub tau: f64,
    pub seed: u64,
    /// Measurement height; when absent it is placed `y0_margin` above the
    /// three-sigma envelope of the surface model.
    pub y0: Option<f64>,
    pub y0_margin: f64,
    pub nx: usize,
    pub forward: ForwardOptions,
    pub mcch: McchOptions,
    pub sign_prior: SignPrior,
    pub outlier_threshold: f64,
}

fn g2() -> ProfileSpec {
    ProfileSpec::cosines(1.5, &[(0.2, 1), (0.2, 2)])
}

fn g4() -> ProfileSpec {
    ProfileSpec::ExpCosSum {
        offset: 1.2,
        terms: vec![
            ExpCosTerm {
                amplitude: 0.05,
                frequency: 2,
            },
            ExpCosTerm {
                amplitude: 0.04,
                frequency: 3,
            },
        ],
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let cos = ProfileSpec::cosines(0.0, &[(1.0, 1)]);
        let single = vec![Stage {
            kappa: 2.0,
            bandwidth: 2,
        }];
        let (mean, intensity, nodes, stages) = match name {
            "ex1" => (ProfileSpec::zero(), cos, 80, single),
            "ex2" => (
                g2(),
                ProfileSpec::trig(0.0, [(1.0, 1, Phase::Sin)]),
                110,
                single,
            ),
            "ex3" => (
                g2(),
                ProfileSpec::trig(0.0, [(1.0, 1, Phase::Sin), (1.0, 1, Phase::Cos)]),
                110,
                single,
            ),
            "ex4" => (
                g4(),
                cos,
                80,
                vec![
                    Stage {
                        kappa: 2.0,
                        bandwidth: 2,
                    },
                    Stage {
                        kappa: 4.0,
                        bandwidth: 4,
                    },
                    Stage {
                        kappa: 6.0,
                        bandwidth: 6,
                    },
                ],
            ),
            "ex5" => (
                g4(),
                ProfileSpec::cosines(0.0, &[(1.0, 1), (1.0, 2)]),
                80,
                single,
            ),
            other => {
                return config(format!(
                    "unknown preset {other:?} (expected one of {PRESETS:?})"
                ))
            }
        };
        Ok(RunConfig {
            preset: name.into(),
            mean,
            intensity,
            nodes,
            stages,
            angle_count: 10,
            angle_range: [-FRAC_PI_3, FRAC_PI_3],
            samples: 1000,
            tau: 1e-3,
            seed: 1,
            y0: None,
            y0_margin: 0.05,
            nx: 256,
            forward: ForwardOptions::default(),
            mcch: McchOptions::default(),
            sign_prior: SignPrior::default(),
            outlier_threshold: 0.5,
        })
    }

    /// Overlay the keys of a JSON object onto a preset. The preset comes from
    /// the object's `"preset"` key, else from `default_preset`.
    pub fn from_json_overrides(text: &str, default_preset: Option<&str>) -> Result<Self> {
        let overrides: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        let serde_json::Value::Object(map) = overrides else {
            return config("config file must hold a JSON object");
        };
        let name = match map.get("preset") {
            Some(v) => v
                .as_str()
                .ok_or_else(|| Error::Config("preset must be a string".into()))?
                .to_string(),
            None => default_preset
                .ok_or_else(|| Error::Config("no preset given".into()))?
                .to_string(),
        };
        let mut base = serde_json::to_value(Self::preset(&name)?)?;
        merge(&mut base, serde_json::Value::Object(map));
        let cfg: RunConfig =
            serde_json::from_value(base).map_err(|e| Error::Config(format!("config file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn model(&self) -> Result<SurfaceModel> {
        SurfaceModel::new(self.mean.clone(), self.intensity.clone(), self.nodes)
    }

    pub fn angles(&self) -> Vec<f64> {
        let [lo, hi] = self.angle_range;
        if self.angle_count == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..self.angle_count)
            .map(|i| lo + i as f64 * (hi - lo) / (self.angle_count - 1) as f64)
            .collect()
    }

    pub fn measurement_height(&self) -> Result<f64> {
        match self.y0 {
            Some(y) => Ok(y),
            None => Ok(self.model()?.three_sigma_envelope() + self.y0_margin),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        if self.nodes > MAX_CONFIG_NODES {
            return config(format!(
                "{} nodes exceeds the limit of {MAX_CONFIG_NODES}",
                self.nodes
            ));
        }
        if self.angle_count == 0 {
            return config("need at least one incidence angle");
        }
        if self.mcch.warm_samples == 0 || self.mcch.warm_samples >= self.samples {
            return config("warm-start sample count must lie in 1..samples");
        }
        if self.sign_prior.node >= self.nodes {
            return config("sign anchor node out of range");
        }
        if !(self.outlier_threshold > 0.0 && self.outlier_threshold <= 1.0) {
            return config("outlier threshold must lie in (0, 1]");
        }
        self.mcch.inversion.validate()?;
        self.plan()?.validate()
    }

    pub fn plan(&self) -> Result<AcquisitionPlan> {
        Ok(AcquisitionPlan {
            model: self.model()?,
            stages: self.stages.clone(),
            angles: self.angles(),
            samples: self.samples,
            tau: self.tau,
            seed: self.seed,
            y0: self.measurement_height()?,
            nx: self.nx,
            forward: self.forward,
        })
    }
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    // Profiles are replaced wholesale so a new kind does not
                    // inherit the old kind's parameters.
                    Some(slot) if k != "mean" && k != "intensity" => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
