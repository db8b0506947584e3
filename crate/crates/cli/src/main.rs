//! `popdyn`: simulate markets, analyze trade and mirror logs, or both.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{BinModeSel, ConditionSel, Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "popdyn", version, about = "Popularity dynamics simulation and log analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a market and write trades.csv, mirrors.csv and ground_truth.csv.
    Simulate(Flags),
    /// Analyze trades.csv and mirrors.csv and write regression, bin and line tables.
    Analyze(Flags),
    /// Simulate, then analyze the simulated logs.
    Pipeline(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON run config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory with trades.csv and mirrors.csv (analyze; defaults to --out).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    condition: Option<ConditionSel>,
    /// Rolling performance window in business days.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, value_enum)]
    bin_mode: Option<BinModeSel>,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.apply(Overrides {
            seed: self.seed,
            out: self.out,
            input: self.input,
            condition: self.condition,
            window: self.window,
            bin_mode: self.bin_mode,
        }))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(flags) => commands::simulate(&flags.resolve()?),
        Command::Analyze(flags) => commands::analyze(&flags.resolve()?),
        Command::Pipeline(flags) => commands::pipeline(&flags.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("popdyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
