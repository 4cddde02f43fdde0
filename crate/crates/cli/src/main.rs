mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Mode};

#[derive(Parser)]
#[command(name = "catloop", version, about = "Spin-dependent kicks of a trapped ion: simulation, reproduction and inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Output directory (overrides `outputs.directory`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Output format; repeatable (overrides `outputs.formats`).
    #[arg(long, value_enum)]
    pub format: Vec<Format>,
    /// Propagation mode (overrides `sim.mode`).
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Classical and quantum evolution for the configured drive.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The built-in tear-drop reference run with Wigner snapshots.
    ReproduceFig1 {
        #[command(flatten)]
        common: Common,
    },
    /// Derived table columns from fitted values (built-in sets or a file).
    ReproduceTable1 {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        set: Option<u8>,
        /// TOML file with `[[fitted]]` entries instead of the built-in sets.
        #[arg(long, value_name = "PATH", conflicts_with = "set")]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Classical grid for the empirical α_max and return-time laws.
    SweepEmpirics {
        /// TOML file with a `[grid]` table; the default grid otherwise.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Shot-noise fringe scans from the configured drive.
    Synth {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Overrides `scan.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fits fringe scans and infers the drive.
    Fit {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Scan table as written by `synth`.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, common } => commands::simulate(&config, &common),
        Command::ReproduceFig1 { common } => commands::reproduce_fig1(&common),
        Command::ReproduceTable1 { set, config, common } => commands::reproduce_table1(set, config.as_deref(), &common),
        Command::SweepEmpirics { config, common } => commands::sweep_empirics(config.as_deref(), &common),
        Command::Synth { config, seed, common } => commands::synth(&config, seed, &common),
        Command::Fit { config, input, common } => commands::fit(&config, &input, &common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
