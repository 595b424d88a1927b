use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use random_grating::config::RunConfig;
use random_grating::harness::{self, default_path, DATASET_FILE, ENSEMBLE_FILE};
use random_grating::{oracle, Error, ErrorKind};

/// Random periodic grating reconstruction from multi-angle far-field data.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Built-in example configuration (ex1 .. ex5).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// JSON file overriding preset fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Write per-iteration objective traces.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesise a noisy measurement dataset.
    Generate {
        /// Also export the dataset as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Reconstruct every sample of a dataset.
    Invert {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Estimate surface statistics from a reconstructed ensemble.
    Stats {
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// Generate, invert and estimate in one run.
    Pipeline,
    /// Run closed-form self-checks.
    Oracle,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            RunConfig::from_json_overrides(&std::fs::read_to_string(path)?, cli.preset.as_deref())?
        }
        None => RunConfig::preset(cli.preset.as_deref().unwrap_or("ex1"))?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = load_config(cli)?;
    if let Command::Oracle = cli.command {
        let checks = oracle::run_all(&cfg)?;
        for c in &checks {
            println!(
                "{:<18} {} value {:.3e} threshold {:.1e}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value,
                c.threshold
            );
        }
        return Ok(checks.iter().all(|c| c.passed));
    }
    let manifest = match &cli.command {
        Command::Generate { csv } => harness::cmd_generate(&cfg, &cli.out, cli.workers, *csv)?,
        Command::Invert { dataset } => {
            let path = default_path(&cli.out, dataset.clone(), DATASET_FILE);
            harness::cmd_invert(&cfg, &path, &cli.out, cli.workers, cli.trace)?
        }
        Command::Stats { ensemble } => {
            let path = default_path(&cli.out, ensemble.clone(), ENSEMBLE_FILE);
            harness::cmd_stats(&cfg, &path, &cli.out)?
        }
        Command::Pipeline => harness::cmd_pipeline(&cfg, &cli.out, cli.workers, cli.trace)?,
        Command::Oracle => unreachable!(),
    };
    for a in &manifest.artifacts {
        println!("{}  {}", a.sha256, cli.out.join(&a.name).display());
    }
    if let Some(inv) = &manifest.inversion {
        if inv.failed > 0 {
            eprintln!(
                "{} of {} samples failed to invert",
                inv.failed,
                inv.failed + inv.reconstructed
            );
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Config | ErrorKind::Io => ExitCode::from(2),
                ErrorKind::Numerical => ExitCode::from(3),
            }
        }
    }
}
