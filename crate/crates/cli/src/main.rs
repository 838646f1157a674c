//! Command-line harness: run solves with structured traces, calibrate the
//! minimum-eigenvalue oracles, and print the analytic work bounds.

mod calibrate;
mod config_file;
mod output;
mod solve_cmd;

use clap::{Parser, Subcommand};

/// Exit code for SecondOrderPoint / success.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_LINE_SEARCH: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "dncg",
    about = "Damped Newton-CG solver with negative-curvature detection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize a test problem and report the run.
    Solve(Box<solve_cmd::SolveArgs>),
    /// Estimate the oracle's false-certificate rate on a fixed spectrum.
    CalibrateOracle(calibrate::CalibrateArgs),
    /// Evaluate the closed-form work bounds for given problem constants.
    Bounds(solve_cmd::BoundsArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with success; usage errors
            // go to stderr with code 64.
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(EXIT_USAGE);
            }
            print!("{e}");
            std::process::exit(EXIT_OK);
        }
    };
    let code = match cli.command {
        Command::Solve(args) => solve_cmd::run_solve(*args),
        Command::CalibrateOracle(args) => calibrate::run_calibrate(args),
        Command::Bounds(args) => solve_cmd::run_bounds(args),
    };
    std::process::exit(code);
}
