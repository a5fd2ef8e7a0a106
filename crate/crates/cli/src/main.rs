//! `twophase`: stationary profiles and stability runs for the two-phase flow
//! model on the half line.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twophase_core::Regime;

use crate::commands::Context;
use crate::config::Loaded;
use crate::error::{CliError, Result};
use crate::output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "twophase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's "out".
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized suites; overrides the config's "seed".
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Route the stationary solver as if the far field were in this regime.
    #[arg(long, global = true)]
    force_regime: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Far-field spectrum and Mach classification.
    Classify,
    /// Stationary profile and its decay report.
    Stationary,
    /// Time integration from a perturbed profile.
    Evolve,
    /// Boundary slope `|u_x(0)|` against the boundary strength.
    Sweep,
    /// Seeded property suite.
    Verify,
}

fn execute(cli: &Cli) -> Result<String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let loaded = Loaded::read(&path.display().to_string())?;
    let force = match (&cli.force_regime, loaded.config.force_regime) {
        (Some(s), _) => Some(s.parse::<Regime>()?),
        (None, r) => r,
    };
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.config.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context {
        seed: cli.seed.or(loaded.config.seed).unwrap_or(0),
        out: OutDir::create(&out)?,
        loaded,
        force,
    };
    match cli.command {
        Command::Classify => commands::classify(&ctx),
        Command::Stationary => commands::stationary(&ctx),
        Command::Evolve => commands::evolve(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Verify => commands::verify(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
