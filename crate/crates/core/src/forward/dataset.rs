//! Synthetic measurement datasets: generation, JSON-lines storage and CSV
//! export.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{add_noise, energy_audit, solve_layer_density, FieldSamples, ForwardOptions};
use crate::error::{config, Error, Result};
use crate::rng;
use crate::surface::{sample_realization_where, SurfaceModel};
use crate::waves::PlaneWave;

pub const DATASET_FORMAT: &str = "random-grating/dataset";
pub const DATASET_VERSION: u32 = 1;

/// One continuation stage: wavenumber and reconstruction bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub kappa: f64,
    pub bandwidth: usize,
}

/// Everything needed to synthesise a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionPlan {
    pub model: SurfaceModel,
    pub stages: Vec<Stage>,
    pub angles: Vec<f64>,
    pub samples: usize,
    pub tau: f64,
    pub seed: u64,
    pub y0: f64,
    pub nx: usize,
    #[serde(default)]
    pub forward: ForwardOptions,
}

impl AcquisitionPlan {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.forward.validate()?;
        if self.stages.is_empty() || self.angles.is_empty() {
            return config("need at least one stage and one angle");
        }
        for s in &self.stages {
            PlaneWave::new(s.kappa, 0.0)?;
        }
        for &a in &self.angles {
            PlaneWave::new(1.0, a)?;
        }
        if self.samples == 0 {
            return config("sample count must be positive");
        }
        if !(self.tau >= 0.0 && self.tau < 1.0) {
            return config("noise level must lie in [0, 1)");
        }
        if !self.y0.is_finite() {
            return config("measurement height is not finite");
        }
        if self.nx < 8 {
            return config("need at least 8 field samples per line");
        }
        Ok(())
    }

    pub fn records_per_sample(&self) -> usize {
        self.stages.len() * self.angles.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub plan: AcquisitionPlan,
    /// Candidate surfaces discarded because they reached the measurement
    /// line.
    pub rejected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRecord {
    pub m: u64,
    pub kappa: f64,
    pub theta: f64,
    pub y0: f64,
    pub nx: usize,
    pub values: Vec<Complex64>,
}

impl FieldRecord {
    pub fn samples(&self) -> FieldSamples {
        FieldSamples {
            kappa: self.kappa,
            theta: self.theta,
            y0: self.y0,
            values: self.values.clone(),
        }
    }
}

/// Noise-free diagnostics gathered while generating.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub rejected: u64,
    pub max_energy_defect: f64,
    pub mean_energy_defect: f64,
    pub max_collocation_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterDataset {
    pub header: DatasetHeader,
    /// Ordered by sample, then stage, then angle.
    pub records: Vec<FieldRecord>,
}

impl ScatterDataset {
    pub fn plan(&self) -> &AcquisitionPlan {
        &self.header.plan
    }

    pub fn record(&self, m: usize, stage: usize, angle: usize) -> &FieldRecord {
        let p = self.plan();
        &self.records[(m * p.stages.len() + stage) * p.angles.len() + angle]
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::DatasetIncomplete("empty file".into()))??;
        let raw: serde_json::Value = serde_json::from_str(&first)?;
        let version = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != DATASET_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: DATASET_VERSION,
            });
        }
        let header: DatasetHeader = serde_json::from_value(raw)?;
        if header.format != DATASET_FORMAT {
            return config(format!("unknown dataset format {:?}", header.format));
        }
        header.plan.validate()?;
        let mut records = Vec::new();
        for line in lines {
            let line = line?;
            if !line.trim().is_empty() {
                records.push(serde_json::from_str::<FieldRecord>(&line)?);
            }
        }
        Self::assemble(header, records)
    }

    /// Put records in canonical order, rejecting duplicates, strays and gaps.
    pub fn assemble(header: DatasetHeader, records: Vec<FieldRecord>) -> Result<Self> {
        let plan = &header.plan;
        let mut slots: BTreeMap<(u64, usize, usize), FieldRecord> = BTreeMap::new();
        for r in records {
            let stage = plan
                .stages
                .iter()
                .position(|s| s.kappa.to_bits() == r.kappa.to_bits());
            let angle = plan
                .angles
                .iter()
                .position(|a| a.to_bits() == r.theta.to_bits());
            let (Some(j), Some(l)) = (stage, angle) else {
                return Err(Error::DatasetIncomplete(format!(
                    "record (m={}, kappa={}, theta={}) not in the acquisition plan",
                    r.m, r.kappa, r.theta
                )));
            };
            if r.m as usize >= plan.samples || r.values.len() != r.nx || r.nx != plan.nx {
                return Err(Error::DatasetIncomplete(format!(
                    "malformed record for sample {}",
                    r.m
                )));
            }
            if slots.insert((r.m, j, l), r).is_some() {
                return Err(Error::DatasetIncomplete("duplicate record".into()));
            }
        }
        let expected = plan.samples * plan.records_per_sample();
        if slots.len() != expected {
            return Err(Error::DatasetIncomplete(format!(
                "{} of {expected} records present",
                slots.len()
            )));
        }
        Ok(ScatterDataset {
            header,
            records: slots.into_values().collect(),
        })
    }

    /// Flat CSV export: one row per field sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "kappa", "theta", "y0", "k", "x", "re", "im"])?;
        for r in &self.records {
            for (k, u) in r.values.iter().enumerate() {
                let x = std::f64::consts::TAU * k as f64 / r.nx as f64;
                w.serialize((r.m, r.kappa, r.theta, r.y0, k, x, u.re, u.im))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct SampleOutput {
    records: Vec<FieldRecord>,
    rejected: u64,
    energy_defects: Vec<f64>,
    residual: f64,
}

fn generate_sample(plan: &AcquisitionPlan, m: u64) -> Result<SampleOutput> {
    let surface =
        sample_realization_where(&plan.model, plan.seed, m, |r| r.max_height() < plan.y0)?;
    let mut out = SampleOutput {
        records: Vec::with_capacity(plan.records_per_sample()),
        rejected: surface.rejected as u64,
        energy_defects: Vec::new(),
        residual: 0.0,
    };
    for (j, stage) in plan.stages.iter().enumerate() {
        for (l, &theta) in plan.angles.iter().enumerate() {
            let wave = PlaneWave::new(stage.kappa, theta)?;
            let density = solve_layer_density(&surface, &wave, &plan.forward)?;
            let mut field = density.sample(plan.y0, plan.nx)?;
            out.energy_defects.push((energy_audit(&field)? - 1.0).abs());
            out.residual = out.residual.max(density.residual);
            let mut noise = rng::stream(plan.seed, &[rng::DOMAIN_NOISE, m, j as u64, l as u64]);
            add_noise(&mut field, plan.tau, &mut noise);
            out.records.push(FieldRecord {
                m,
                kappa: stage.kappa,
                theta,
                y0: plan.y0,
                nx: plan.nx,
                values: field.values,
            });
        }
    }
    Ok(out)
}

/// Run `f` on a pool of `workers` threads (0 means rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Synthesise every record of `plan`. Output is independent of `workers`.
pub fn generate_dataset(
    plan: &AcquisitionPlan,
    workers: usize,
) -> Result<(ScatterDataset, GenerationReport)> {
    plan.validate()?;
    let outputs: Vec<Result<SampleOutput>> = with_workers(workers, || {
        (0..plan.samples as u64)
            .into_par_iter()
            .map(|m| generate_sample(plan, m))
            .collect()
    })?;
    let mut records = Vec::with_capacity(plan.samples * plan.records_per_sample());
    let mut report = GenerationReport::default();
    let mut defect_sum = 0.0;
    let mut defect_count = 0usize;
    for out in outputs {
        let out = out?;
        report.rejected += out.rejected;
        report.max_collocation_residual = report.max_collocation_residual.max(out.residual);
        for d in out.energy_defects {
            report.max_energy_defect = report.max_energy_defect.max(d);
            defect_sum += d;
            defect_count += 1;
        }
        records.extend(out.records);
    }
    report.mean_energy_defect = defect_sum / defect_count.max(1) as f64;
    let header = DatasetHeader {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        plan: plan.clone(),
        rejected: report.rejected,
    };
    Ok((ScatterDataset { header, records }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileSpec;

    fn tiny_plan() -> AcquisitionPlan {
        AcquisitionPlan {
            model: SurfaceModel::new(
                ProfileSpec::cosines(1.5, &[(0.2, 1)]),
                ProfileSpec::cosines(0.0, &[(0.3, 1)]),
                40,
            )
            .unwrap(),
            stages: vec![Stage {
                kappa: 2.0,
                bandwidth: 2,
            }],
            angles: vec![-0.3, 0.2],
            samples: 2,
            tau: 1e-3,
            seed: 5,
            y0: 2.2,
            nx: 64,
            forward: ForwardOptions::default(),
        }
    }

    #[test]
    fn roundtrip_and_validation() {
        let (ds, _) = generate_dataset(&tiny_plan(), 1).unwrap();
        assert_eq!(ds.records.len(), 4);
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let back = ScatterDataset::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, ds);

        let text = String::from_utf8(buf).unwrap();
        let truncated: Vec<&str> = text.lines().take(4).collect();
        assert!(matches!(
            ScatterDataset::read_jsonl(truncated.join("\n").as_bytes()),
            Err(Error::DatasetIncomplete(_))
        ));
        let bumped = text.replacen("\"version\":1", "\"version\":9", 1);
        assert!(matches!(
            ScatterDataset::read_jsonl(bumped.as_bytes()),
            Err(Error::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn records_are_shuffle_tolerant() {
        let (ds, _) = generate_dataset(&tiny_plan(), 1).unwrap();
        let mut recs = ds.records.clone();
        recs.reverse();
        let again = ScatterDataset::assemble(ds.header.clone(), recs).unwrap();
        assert_eq!(again, ds);
        let mut dup = ds.records.clone();
        dup[1] = dup[0].clone();
        assert!(ScatterDataset::assemble(ds.header.clone(), dup).is_err());
    }
}
