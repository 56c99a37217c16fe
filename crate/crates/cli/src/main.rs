// Copyright 2026 The magicarp Authors
// SPDX-License-Identifier: Apache-2.0

//! `magicarp` command-line driver.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{RunConfig, SEED_ENV};
use crate::exit::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "magicarp",
    version,
    about = "Quantum gate synthesis by adjoint shooting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random start; overrides MAGICARP_SEED and the file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `out_dir` in the file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Benchmark worker threads (0 = one per logical core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Keep wall-clock time in report JSON (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize the adjoint matrix for the configured target.
    Optimize,
    /// Optimize piecewise-constant amplitudes with exact gradients.
    Grape,
    /// Run a random-restart campaign over several dimensions.
    Benchmark,
    /// Test whether a schedule has the time-optimal structure.
    Certify {
        /// Schedule CSV; overrides `certify.schedule`.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Export the Bloch trajectory of |0> for a qubit schedule.
    Bloch {
        /// Schedule CSV; overrides `bloch.schedule`.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    let env_seed = std::env::var(SEED_ENV).ok();
    config.resolve_seed(cli.seed, env_seed.as_deref())?;
    let schedule = match &cli.command {
        Command::Certify { schedule } | Command::Bloch { schedule } => schedule.clone(),
        _ => None,
    };
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    let ctx = Context {
        out_dir: config.out_dir.clone(),
        config,
        workers: cli.workers,
        timing: cli.timing,
        schedule,
    };
    match cli.command {
        Command::Optimize => commands::cmd_optimize(&ctx),
        Command::Grape => commands::cmd_grape(&ctx),
        Command::Benchmark => commands::cmd_benchmark(&ctx),
        Command::Certify { .. } => commands::cmd_certify(&ctx),
        Command::Bloch { .. } => commands::cmd_bloch(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
