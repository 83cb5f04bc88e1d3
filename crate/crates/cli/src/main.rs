//! `foreco`: train forecasters, simulate lossy links, replay recovery
//! policies and run interference sweeps.

mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{gen_trace, simulate, sweep, train};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "foreco", version, about)]
struct Cli {
    /// Worker threads for sweeps; defaults to every core
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a VAR forecaster to a command trace
    Train(train::TrainArgs),
    /// Send a trace over a simulated channel and replay a recovery policy
    Simulate(simulate::SimulateArgs),
    /// Compare two policies over a grid of interference settings
    Sweep(sweep::SweepArgs),
    /// Write a synthetic command trace
    GenTrace(gen_trace::GenTraceArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Train(a) => train::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Sweep(a) => sweep::run(a, cli.jobs),
        Command::GenTrace(a) => gen_trace::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FORECO_LOG", "warn")).init();
    let cli = Cli::parse();
    if cli.jobs == Some(0) {
        let e = error::CliError::config("--jobs must be >= 1");
        eprintln!("error: {e}\n{}", e.json_line());
        return ExitCode::from(e.kind.exit_code() as u8);
    }
    let outcome = std::panic::catch_unwind(|| run(&cli)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(error::CliError::new(error::ErrorKind::Internal, format!("internal error: {msg}")))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.json_line());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
