//! Command implementations shared by the binary and the FFI layer.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::RunConfig;
use crate::error::{config, Error, Result};
use crate::forward::dataset::{generate_dataset, GenerationReport, ScatterDataset};
use crate::stats::{
    mcch_run, reconstruction_stats, McchOutcome, ReconstructionStats, SampleFailure,
};

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const DATASET_CSV_FILE: &str = "dataset.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.json";
pub const TRACE_FILE: &str = "traces.jsonl";
pub const STATS_FILE: &str = "stats.json";
pub const NODES_CSV_FILE: &str = "stats_nodes.csv";
pub const COEFFS_CSV_FILE: &str = "stats_coeffs.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

const ENSEMBLE_FORMAT: &str = "random-grating/ensemble";
const ENSEMBLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InversionSummary {
    pub reconstructed: usize,
    pub failed: usize,
    pub failures: Vec<SampleFailure>,
}

/// Run record written next to the artifacts. Everything except
/// `timings_ms` is a deterministic function of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub artifacts: Vec<Artifact>,
    pub generation: Option<GenerationReport>,
    pub inversion: Option<InversionSummary>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl Manifest {
    fn new(command: &str, cfg: &RunConfig) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: cfg.clone(),
            artifacts: Vec::new(),
            generation: None,
            inversion: None,
            timings_ms: BTreeMap::new(),
        }
    }

    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.timings_ms
            .insert(phase.into(), start.elapsed().as_millis() as u64);
        Ok(out)
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(self)?;
        text.push(b'\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_artifact(
    dir: &Path,
    name: &str,
    fill: impl FnOnce(&mut Vec<u8>) -> Result<()>,
) -> Result<Artifact> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    let mut file = BufWriter::new(fs::File::create(dir.join(name))?);
    file.write_all(&buf)?;
    file.flush()?;
    Ok(Artifact {
        name: name.into(),
        sha256: sha256_hex(&buf),
        bytes: buf.len() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EnsembleFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    outcome: McchOutcome,
}

pub fn read_dataset(path: &Path) -> Result<ScatterDataset> {
    ScatterDataset::read_jsonl(BufReader::new(fs::File::open(path)?))
}

pub fn read_ensemble(path: &Path) -> Result<McchOutcome> {
    let text = fs::read_to_string(path)?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    let version = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if version != ENSEMBLE_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: ENSEMBLE_VERSION,
        });
    }
    let file: EnsembleFile = serde_json::from_value(raw)?;
    if file.format != ENSEMBLE_FORMAT {
        return config(format!("unknown ensemble format {:?}", file.format));
    }
    Ok(file.outcome)
}

fn prepare(out: &Path, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    Ok(())
}

fn generate_into(
    manifest: &mut Manifest,
    cfg: &RunConfig,
    out: &Path,
    workers: usize,
    csv: bool,
) -> Result<ScatterDataset> {
    let plan = cfg.plan()?;
    let (dataset, report) = manifest.time("generate", || generate_dataset(&plan, workers))?;
    manifest.generation = Some(report);
    manifest
        .artifacts
        .push(write_artifact(out, DATASET_FILE, |b| {
            dataset.write_jsonl(b)
        })?);
    if csv {
        manifest
            .artifacts
            .push(write_artifact(out, DATASET_CSV_FILE, |b| {
                dataset.write_csv(b)
            })?);
    }
    Ok(dataset)
}

fn invert_into(
    manifest: &mut Manifest,
    cfg: &RunConfig,
    dataset: &ScatterDataset,
    out: &Path,
    workers: usize,
    trace: bool,
) -> Result<McchOutcome> {
    let outcome = manifest.time("invert", || mcch_run(dataset, &cfg.mcch, workers, trace))?;
    manifest.inversion = Some(InversionSummary {
        reconstructed: outcome.ensemble.len(),
        failed: outcome.failures.len(),
        failures: outcome.failures.clone(),
    });
    let file = EnsembleFile {
        format: ENSEMBLE_FORMAT.into(),
        version: ENSEMBLE_VERSION,
        outcome,
    };
    manifest
        .artifacts
        .push(write_artifact(out, ENSEMBLE_FILE, |b| {
            serde_json::to_writer_pretty(&mut *b, &file)?;
            b.push(b'\n');
            Ok(())
        })?);
    if trace {
        manifest
            .artifacts
            .push(write_artifact(out, TRACE_FILE, |b| {
                for rec in &file.outcome.traces {
                    serde_json::to_writer(&mut *b, rec)?;
                    b.push(b'\n');
                }
                Ok(())
            })?);
    }
    Ok(file.outcome)
}

fn stats_into(
    manifest: &mut Manifest,
    cfg: &RunConfig,
    outcome: &McchOutcome,
    out: &Path,
) -> Result<ReconstructionStats> {
    let stats = manifest.time("stats", || {
        reconstruction_stats(
            &outcome.surfaces(),
            cfg.nodes,
            cfg.sign_prior,
            cfg.outlier_threshold,
        )
    })?;
    manifest
        .artifacts
        .push(write_artifact(out, STATS_FILE, |b| {
            serde_json::to_writer_pretty(&mut *b, &stats)?;
            b.push(b'\n');
            Ok(())
        })?);
    manifest
        .artifacts
        .push(write_artifact(out, NODES_CSV_FILE, |b| {
            stats.write_nodes_csv(b)
        })?);
    manifest
        .artifacts
        .push(write_artifact(out, COEFFS_CSV_FILE, |b| {
            stats.write_coeffs_csv(b)
        })?);
    Ok(stats)
}

pub fn cmd_generate(cfg: &RunConfig, out: &Path, workers: usize, csv: bool) -> Result<Manifest> {
    prepare(out, cfg)?;
    let mut manifest = Manifest::new("generate", cfg);
    generate_into(&mut manifest, cfg, out, workers, csv)?;
    manifest.write(out)?;
    Ok(manifest)
}

pub fn cmd_invert(
    cfg: &RunConfig,
    dataset: &Path,
    out: &Path,
    workers: usize,
    trace: bool,
) -> Result<Manifest> {
    prepare(out, cfg)?;
    let mut manifest = Manifest::new("invert", cfg);
    let data = read_dataset(dataset)?;
    invert_into(&mut manifest, cfg, &data, out, workers, trace)?;
    manifest.write(out)?;
    Ok(manifest)
}

pub fn cmd_stats(cfg: &RunConfig, ensemble: &Path, out: &Path) -> Result<Manifest> {
    prepare(out, cfg)?;
    let mut manifest = Manifest::new("stats", cfg);
    let outcome = read_ensemble(ensemble)?;
    stats_into(&mut manifest, cfg, &outcome, out)?;
    manifest.write(out)?;
    Ok(manifest)
}

pub fn cmd_pipeline(cfg: &RunConfig, out: &Path, workers: usize, trace: bool) -> Result<Manifest> {
    prepare(out, cfg)?;
    let mut manifest = Manifest::new("pipeline", cfg);
    let dataset = generate_into(&mut manifest, cfg, out, workers, false)?;
    let outcome = invert_into(&mut manifest, cfg, &dataset, out, workers, trace)?;
    stats_into(&mut manifest, cfg, &outcome, out)?;
    manifest.write(out)?;
    Ok(manifest)
}

pub fn default_path(out: &Path, given: Option<PathBuf>, name: &str) -> PathBuf {
    given.unwrap_or_else(|| out.join(name))
}
