//! `rfmap`: simulate RF environments, build power maps from sensor
//! records, plan sensor deployment density, and estimate PSDs from raw IQ
//! captures.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 degenerate
//! scenario draw, 4 I/O error.

mod commands;
mod config;
mod error;
mod manifest;
mod proj;

use clap::{Parser, Subcommand};

use commands::{density, map, simulate, welch};
use error::CliResult;

#[derive(Parser)]
#[command(
    name = "rfmap",
    version,
    about = "RF power map simulation, reconstruction and deployment planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an RF environment, reconstruct its power map, report MSE
    Simulate(simulate::SimulateArgs),
    /// Minimum sensor density for a coverage confidence; sweeps to CSV
    Density(density::DensityArgs),
    /// Build a power map from a JSON-lines record file
    Map(map::MapArgs),
    /// Estimate a PSD from a raw IQ capture via Welch averaging
    Welch(welch::WelchArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Density(args) => density::run(args),
        Command::Map(args) => map::run(args),
        Command::Welch(args) => welch::run(args),
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
