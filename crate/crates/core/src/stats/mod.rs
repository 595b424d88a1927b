//! Monte Carlo reconstruction of a surface ensemble and the statistics
//! derived from it.

pub mod estimators;
pub mod sign;

pub use estimators::{covariance_diag, intensity_estimate, mean_coeffs, node_matrix, NodeMoments};
pub use sign::{sign_recovery, SignPrior, SignReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{config, Error, Result};
use crate::forward::dataset::{with_workers, ScatterDataset};
use crate::inversion::{continuation_invert, sample_spectra, InversionOptions};
use crate::surface::FourierSurface;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McchOptions {
    pub inversion: InversionOptions,
    /// Samples inverted from the flat initial guess through every stage;
    /// their mean seeds the remaining samples, which run the final stage
    /// only.
    pub warm_samples: usize,
    /// Largest tolerated fraction of failed inversions.
    pub max_failure_fraction: f64,
}

impl Default for McchOptions {
    fn default() -> Self {
        McchOptions {
            inversion: InversionOptions::default(),
            warm_samples: 100,
            max_failure_fraction: 0.05,
        }
    }
}

/// One line of the optional iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub m: u64,
    pub stage: usize,
    pub iter: usize,
    #[serde(rename = "J_total")]
    pub objective: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub m: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub m: u64,
    pub coeffs: FourierSurface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McchOutcome {
    pub initial_guess: FourierSurface,
    pub warm_start: FourierSurface,
    pub ensemble: Vec<EnsembleMember>,
    pub failures: Vec<SampleFailure>,
    #[serde(skip)]
    pub traces: Vec<TraceRecord>,
}

impl McchOutcome {
    pub fn surfaces(&self) -> Vec<FourierSurface> {
        self.ensemble.iter().map(|e| e.coeffs.clone()).collect()
    }
}

type SampleRun = (u64, Result<FourierSurface>, Vec<TraceRecord>);

fn invert_one(
    dataset: &ScatterDataset,
    m: usize,
    init: &FourierSurface,
    first_stage: usize,
    opts: &InversionOptions,
    trace: bool,
) -> SampleRun {
    let mut records = Vec::new();
    let run = (|| {
        let stages = dataset.plan().stages[first_stage..]
            .iter()
            .enumerate()
            .map(|(j, s)| Ok((*s, sample_spectra(dataset, m, first_stage + j, opts)?)))
            .collect::<Result<Vec<_>>>()?;
        continuation_invert(&stages, init, opts, |j, rec| {
            if trace {
                records.push(TraceRecord {
                    m: m as u64,
                    stage: first_stage + j,
                    iter: rec.iteration,
                    objective: rec.objective,
                    coeffs: rec.coeffs.clone(),
                });
            }
        })
    })();
    (m as u64, run, records)
}

/// Invert every sample of `dataset`. The result does not depend on
/// `workers`.
pub fn mcch_run(
    dataset: &ScatterDataset,
    opts: &McchOptions,
    workers: usize,
    trace: bool,
) -> Result<McchOutcome> {
    opts.inversion.validate()?;
    let plan = dataset.plan();
    let total = plan.samples;
    let warm = opts.warm_samples.clamp(1, total);
    let last = plan.stages.len() - 1;
    let initial_guess = FourierSurface::flat(plan.y0, plan.stages[0].bandwidth);

    let first: Vec<SampleRun> = with_workers(workers, || {
        (0..warm)
            .into_par_iter()
            .map(|m| invert_one(dataset, m, &initial_guess, 0, &opts.inversion, trace))
            .collect()
    })?;
    let warm_ok: Vec<FourierSurface> = first
        .iter()
        .filter_map(|(_, r, _)| r.as_ref().ok().cloned())
        .collect();
    if warm_ok.is_empty() {
        let msg = first
            .iter()
            .find_map(|(_, r, _)| r.as_ref().err().map(|e| e.to_string()))
            .unwrap_or_default();
        return Err(Error::TooManyFailures {
            failed: warm,
            total: warm,
        })
        .map_err(|e| Error::Config(format!("{e}; first error: {msg}")));
    }
    let warm_start = mean_coeffs(&warm_ok)?.with_bandwidth(plan.stages[last].bandwidth);

    let rest: Vec<SampleRun> = with_workers(workers, || {
        (warm..total)
            .into_par_iter()
            .map(|m| invert_one(dataset, m, &warm_start, last, &opts.inversion, trace))
            .collect()
    })?;

    let mut ensemble = Vec::with_capacity(total);
    let mut failures = Vec::new();
    let mut traces = Vec::new();
    for (m, run, recs) in first.into_iter().chain(rest) {
        match run {
            Ok(c) => ensemble.push(EnsembleMember { m, coeffs: c }),
            Err(e) => failures.push(SampleFailure {
                m,
                error: e.to_string(),
            }),
        }
        traces.extend(recs);
    }
    if failures.len() as f64 > opts.max_failure_fraction * total as f64 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total,
        });
    }
    Ok(McchOutcome {
        initial_guess,
        warm_start,
        ensemble,
        failures,
        traces,
    })
}

/// Everything estimated from a reconstructed ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionStats {
    pub samples: usize,
    pub mean_coeffs: Vec<f64>,
    pub nodes: Vec<f64>,
    pub mean_curve: Vec<f64>,
    pub variance: Vec<f64>,
    pub intensity_squared: Vec<f64>,
    pub intensity_abs: Vec<f64>,
    /// `|h|` with the consensus sign applied; absent if the sign consensus
    /// was ambiguous.
    pub intensity_signed: Option<Vec<f64>>,
    pub sign: Option<SignReport>,
}

/// Node statistics of `ensemble` on the grid `x_i = i Δx`, `i < nodes`.
pub fn reconstruction_stats(
    ensemble: &[FourierSurface],
    nodes: usize,
    prior: SignPrior,
    outlier_threshold: f64,
) -> Result<ReconstructionStats> {
    if nodes < 2 {
        return config("need at least two nodes");
    }
    let dx = std::f64::consts::TAU / nodes as f64;
    let xs: Vec<f64> = (0..nodes).map(|i| i as f64 * dx).collect();
    let mean = mean_coeffs(ensemble)?;
    let values = node_matrix(ensemble, &xs);
    let moments = covariance_diag(&values)?;
    let h2 = intensity_estimate(&moments.variance, dx);
    let habs: Vec<f64> = h2.iter().map(|v| v.sqrt()).collect();
    let deviations: Vec<Vec<f64>> = values
        .iter()
        .map(|row| row.iter().zip(&moments.mean).map(|(v, m)| v - m).collect())
        .collect();
    let sign = match sign_recovery(&deviations, prior, outlier_threshold) {
        Ok(r) => Some(r),
        Err(Error::Ambiguity(_)) => None,
        Err(e) => return Err(e),
    };
    let signed = sign.as_ref().map(|s| {
        habs.iter()
            .zip(&s.consensus)
            .map(|(h, &c)| h * c as f64)
            .collect()
    });
    Ok(ReconstructionStats {
        samples: ensemble.len(),
        mean_coeffs: mean.into_coeffs(),
        nodes: xs,
        mean_curve: moments.mean,
        variance: moments.variance,
        intensity_squared: h2,
        intensity_abs: habs,
        intensity_signed: signed,
        sign,
    })
}

impl ReconstructionStats {
    /// Node table: x, mean, variance, h², |h|, signed h, consensus sign.
    pub fn write_nodes_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "mean", "variance", "h2", "h_abs", "h_signed", "sign"])?;
        for i in 0..self.nodes.len() {
            let signed = self.intensity_signed.as_ref().map(|s| s[i]);
            let sign = self.sign.as_ref().map(|s| s.consensus[i]);
            w.serialize((
                self.nodes[i],
                self.mean_curve[i],
                self.variance[i],
                self.intensity_squared[i],
                self.intensity_abs[i],
                signed,
                sign,
            ))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_coeffs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "mean"])?;
        for (p, c) in self.mean_coeffs.iter().enumerate() {
            w.serialize((p, c))?;
        }
        w.flush()?;
        Ok(())
    }
}
