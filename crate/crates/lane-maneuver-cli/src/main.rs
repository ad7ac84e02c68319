//! Command-line entry point: argument parsing only; all behavior lives in
//! the library so it can be tested in-process.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lane_maneuver_cli::commands::{
    cmd_plan, cmd_reproduce_paper, cmd_sweep, cmd_validate, OutputOptions, SweepParam,
};

#[derive(Parser)]
#[command(
    name = "lane-maneuver",
    version,
    about = "Time- and energy-optimal cooperative lane-change planning",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a scenario end to end; write a trajectory table and plan report.
    Plan {
        /// Scenario file (TOML by default, JSON with a .json extension).
        scenario: PathBuf,
        /// Output directory for generated files (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory sample step (s).
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Sample count for the safety audit.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Discretization steps for the verification oracle.
        #[arg(long = "oracle-n", default_value_t = 500)]
        oracle_n: usize,
        /// Relative cost tolerance for the oracle cross-check.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
    },
    /// Re-audit an externally produced trajectory table against a scenario.
    Validate {
        /// Scenario file the trajectory claims to realize.
        scenario: PathBuf,
        /// Trajectory table (CSV) to audit.
        trajectory: PathBuf,
    },
    /// Re-run the published reference case studies and print the
    /// computed-versus-published comparison table.
    #[command(name = "reproduce-paper")]
    ReproducePaper {
        /// Directory for per-scenario trajectory tables (omit to skip).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory sample step (s).
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Plan one scenario across a grid of a single parameter.
    Sweep {
        /// Scenario file providing the base configuration.
        scenario: PathBuf,
        /// Parameter to vary: d-c-fixed, t-f, or alpha.
        #[arg(long)]
        param: String,
        /// First grid value.
        #[arg(long)]
        from: f64,
        /// Last grid value (inclusive).
        #[arg(long)]
        to: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Plan {
            scenario,
            out,
            dt,
            samples,
            oracle_n,
            tolerance,
        } => cmd_plan(
            &scenario,
            &OutputOptions { out_dir: out, dt },
            samples,
            oracle_n,
            tolerance,
        ),
        Command::Validate {
            scenario,
            trajectory,
        } => cmd_validate(&scenario, &trajectory),
        Command::ReproducePaper { out, dt } => {
            cmd_reproduce_paper(&OutputOptions { out_dir: out, dt })
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
        } => match param.parse::<SweepParam>() {
            Ok(param) => cmd_sweep(&scenario, param, from, to, steps),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    };
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
