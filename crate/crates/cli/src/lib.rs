//! Configuration-driven experiment runner for the splitting chains.
//!
//! A run reads a JSON config, dispatches one experiment, and writes one CSV
//! file per result table plus a `run.json` manifest into the output
//! directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiments::{emit_portrait, run_experiment, Outcome, PortraitSample};
pub use output::{Manifest, Table, VERSION};

pub const WORKERS_ENV: &str = "SPLITFLOW_WORKERS";

/// Worker count from `SPLITFLOW_WORKERS`, defaulting to one.
pub fn workers_from_env() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub subcommand: String,
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Loads the config, applies command-line overrides, and runs the
/// experiment on a pool of `opts.workers` threads.
pub fn run(opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut cfg = ExperimentConfig::load(&opts.config)?;
    if cfg.experiment.name() != opts.subcommand {
        return Err(CliError::Config(format!(
            "{}: experiment block is `{}` but the subcommand is `{}`",
            opts.config.display(),
            cfg.experiment.name(),
            opts.subcommand
        )));
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.output = out.clone();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", opts.workers)))?;
    let start = Instant::now();
    let outcome = pool.install(|| run_experiment(&cfg))?;
    let wall = start.elapsed().as_secs_f64();
    write_outputs(&cfg, &opts.subcommand, opts.workers, wall, &outcome)
}

fn write_outputs(
    cfg: &ExperimentConfig,
    subcommand: &str,
    workers: usize,
    wall: f64,
    outcome: &Outcome,
) -> Result<RunReport, CliError> {
    let dir: &Path = &cfg.output;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        files.push(t.write(dir)?);
    }
    let manifest = Manifest {
        version: VERSION,
        subcommand,
        seed: cfg.seed,
        workers,
        wall_time_seconds: wall,
        config: cfg,
        outputs: outcome.tables.iter().map(Table::file_name).collect(),
        summary: &outcome.summary,
    };
    files.push(manifest.write(dir)?);
    if let Some(f) = &outcome.failure {
        return Err(CliError::Validation(f.clone()));
    }
    Ok(RunReport { out_dir: dir.to_path_buf(), files })
}
