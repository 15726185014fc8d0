//! `sparsecorr` command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 violated precondition, 4 numerical
//! failure, 5 I/O.

mod commands;
mod config;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsecorr::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sparsecorr::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Precondition => 3,
                ErrorKind::Numerical => 4,
                ErrorKind::Io => 5,
            },
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sparsecorr", version, about = "Sparse recovery from sparsely corrupted measurements")]
struct Cli {
    /// TOML file; the section named after the command supplies defaults for its flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the coherence profile of a dictionary pair.
    Coherence(commands::CoherenceFlags),
    /// Largest guaranteed signal sparsity for each error sparsity, as CSV.
    Threshold(commands::ThresholdFlags),
    /// Draw a random sparse instance and its measurement.
    Generate(commands::GenerateFlags),
    /// Recover `x` and `e` from a measurement.
    Recover(commands::RecoverFlags),
    /// Monte-Carlo success rates over a sparsity grid.
    Phase(commands::PhaseFlags),
    /// Restore an image overwritten by a mask.
    Inpaint(commands::InpaintFlags),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let config_text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => None,
    };
    let ctx = commands::Context {
        config: config_text,
        out_dir: cli.out_dir,
    };
    match cli.command {
        Command::Coherence(f) => commands::coherence(&ctx, f),
        Command::Threshold(f) => commands::threshold(&ctx, f),
        Command::Generate(f) => commands::generate(&ctx, f),
        Command::Recover(f) => commands::recover(&ctx, f),
        Command::Phase(f) => commands::phase(&ctx, f),
        Command::Inpaint(f) => commands::inpaint(&ctx, f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
