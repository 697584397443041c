//! `bqc`: run Bayesian quantum circuit experiments from JSON configs.

mod artifacts;
mod config;
mod error;
mod inspect;
mod train;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "bqc", version, about = "Bayesian quantum circuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its artifacts.
    Train { config: PathBuf },
    /// Measure the data register of a trained model and write a histogram.
    Sample {
        model: PathBuf,
        #[arg(long)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the prior, likelihoods and optionally one posterior of a model.
    Inspect {
        model: PathBuf,
        #[arg(long)]
        posterior_x: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Verify,
}

/// Honors `BQC_THREADS` by sizing the global rayon pool.
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("BQC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("BQC_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Train { config } => train::cmd_train(&config),
        Command::Sample {
            model,
            shots,
            seed,
            out,
        } => inspect::cmd_sample(&model, shots, seed, &out),
        Command::Inspect { model, posterior_x } => {
            inspect::cmd_inspect(&model, posterior_x, &mut std::io::stdout().lock())
        }
        Command::Verify => verify::cmd_verify(&mut std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
