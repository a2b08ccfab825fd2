use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use acc_cli::{
    run_analyze_ss, run_fit_limits, run_overshoot, run_safety, run_simulate, run_sweep, CliError,
};

/// Platoon simulation and string-stability analysis for ACC controllers
/// with built-in acceleration/deceleration limits.
#[derive(Parser)]
#[command(name = "acc-cli", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectories.csv / metrics.json.
    Simulate {
        /// Scenario document (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write plot.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Frequency-domain string-stability and dampening report.
    AnalyzeSs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytic overshoot solution for a step-like lead speed increase.
    Overshoot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gain-feasibility bounds and optional trajectory hazard scan.
    Safety {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid of scenario variants in parallel and summarize.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a limit model from trajectory CSVs by the tipping-point fit.
    FitLimits {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, plot } => run_simulate(&config, &out, plot),
        Command::AnalyzeSs { config, out } => run_analyze_ss(&config, &out),
        Command::Overshoot { config, out } => run_overshoot(&config, &out),
        Command::Safety { config, out } => run_safety(&config, &out),
        Command::Sweep { config, out } => run_sweep(&config, &out),
        Command::FitLimits { config, out } => run_fit_limits(&config, &out),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
