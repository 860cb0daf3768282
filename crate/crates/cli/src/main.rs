use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splitflow_cli::{run, workers_from_env, RunOptions};

#[derive(Parser)]
#[command(name = "splitflow", version = splitflow_cli::VERSION, about = "Random-splitting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run chains and record their states.
    Simulate(Common),
    /// Estimate E[H(X_n)] at several levels and fit the affine drift bound.
    Drift(Common),
    /// Single-cycle entrance probability into the dissipative region.
    Entrance(Common),
    /// Triad thermalization probability over a grid of scales.
    Thermalize(Common),
    /// Return times to the fitted sublevel set and their tail bound.
    ReturnTime(Common),
    /// Sampled exact-flow trajectories of one triad.
    TriadPortrait(Common),
    /// Splitting-sum and conservation self-checks.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Drift(c) => ("drift", c),
        Command::Entrance(c) => ("entrance", c),
        Command::Thermalize(c) => ("thermalize", c),
        Command::ReturnTime(c) => ("return-time", c),
        Command::TriadPortrait(c) => ("triad-portrait", c),
        Command::Validate(c) => ("validate", c),
    };
    let result = workers_from_env().and_then(|workers| {
        run(&RunOptions { subcommand: name.into(), config: common.config, seed: common.seed, out: common.out, workers })
    });
    match result {
        Ok(report) => {
            println!("wrote {} files to {}", report.files.len(), report.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("splitflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
