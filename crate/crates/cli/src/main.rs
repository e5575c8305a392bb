//! `bbgky`: hierarchy inspection, noisy simulation, mitigation and parameter
//! scans driven by a TOML experiment file.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbgky_core::Execution;
use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "bbgky", version, about = "BBGKY-constrained zero-noise extrapolation")]
struct Cli {
    /// Run every data-parallel stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive the radius-r equation subset and, for small registers, the
    /// connected components of the full hierarchy.
    Hierarchy {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `mitigation.radius`.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Simulate the folded noisy evolution and write the measurement set.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the top-level `seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        infinite_shots: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mitigate a measurement set with plain ZNE and with equation constraints.
    Mitigate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        subset: PathBuf,
        /// Drop the equation rows so both blocks reduce to per-string fits.
        #[arg(long)]
        no_equations: bool,
        /// Also write the constrained design matrix and target as CSV.
        #[arg(long)]
        dump_matrix: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sweep the background field and mass over a grid and score both methods.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Points per axis of a square grid, replacing the configured axes.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        infinite_shots: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Cross-check the symbolic machinery against dense-matrix oracles.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Hierarchy { config, radius, out_dir } => {
            let mut config = load(&config, None)?;
            if let Some(r) = radius {
                config.mitigation.radius = r;
            }
            let out = commands::resolve_out_dir(out_dir, &config);
            commands::hierarchy(&config, &out)
        }
        Command::Simulate { config, seed, infinite_shots, out_dir } => {
            let config = load(&config, seed)?;
            let out = commands::resolve_out_dir(out_dir, &config);
            commands::simulate(&config, infinite_shots, &out, execution)
        }
        Command::Mitigate { config, measurements, subset, no_equations, dump_matrix, out_dir } => {
            let config = load(&config, None)?;
            let out = commands::resolve_out_dir(out_dir, &config);
            let args = commands::MitigateArgs {
                measurements: &measurements,
                subset: &subset,
                no_equations,
                dump_matrix,
            };
            commands::mitigate(&config, &args, &out)
        }
        Command::Scan { config, grid, seed, infinite_shots, out_dir } => {
            let config = load(&config, seed)?;
            let out = commands::resolve_out_dir(out_dir, &config);
            commands::scan(&config, grid, infinite_shots, &out, execution)
        }
        Command::Verify { seed } => commands::verify(seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
