//! `gpia`: runs policy-iteration, Monte Carlo and coupling experiments from
//! a TOML configuration and writes CSV tables.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<gpia_core::Error> for CliError {
    fn from(e: gpia_core::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else if e.is_argument() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gpia", version, about = "Generalized policy iteration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all random streams; overrides the configured seeds
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run policy iteration and write value, policy and convergence tables
    Iterate(Common),
    /// Compare Monte Carlo payoff estimates with the converged value
    VerifyMc(Common),
    /// Estimate mirror-coupling separation probabilities
    Coupling(Common),
    /// Check the standing assumptions and the example-class certificate
    Check(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cmd, common): (fn(&config::ExperimentConfig, &std::path::Path) -> Result<(), CliError>, Common) =
        match cli.command {
            Command::Iterate(c) => (commands::iterate, c),
            Command::VerifyMc(c) => (commands::verify_mc, c),
            Command::Coupling(c) => (commands::coupling, c),
            Command::Check(c) => (commands::check, c),
        };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", common.config.display())))?;
    let mut cfg = config::ExperimentConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.override_seed(seed);
    }
    let out = common
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("creating {}: {e}", out.display())))?;
    cmd(&cfg, &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // usage errors count as configuration errors
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpia: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
