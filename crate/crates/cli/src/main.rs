//! Command-line front end for the randtime-lse experiments.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::RunArgs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "randtime-lse", version, about = "Drift estimation under random sampling times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write sampled grids and Brownian increments (default N = 10, 100, 1000).
    SimulateTimes(RunArgs),
    /// Monte Carlo replications of the estimator statistics.
    Mc(RunArgs),
    /// Exact moments against their limits.
    Moments(RunArgs),
    /// Counts of renewal grids whose last kept time exceeds 1.
    TailTable(RunArgs),
    /// Mean of Q_N across a range of N.
    QnTrace(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SimulateTimes(a) => commands::simulate_times(a),
        Command::Mc(a) => commands::mc(a),
        Command::Moments(a) => commands::moments(a),
        Command::TailTable(a) => commands::tail_table(a),
        Command::QnTrace(a) => commands::qn_trace(a),
    };
    match result {
        Ok(manifest) => {
            eprintln!("manifest: {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
