use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pqbbh_cli::{execute, exit_code, Command, Settings, EXIT_OK, EXIT_VIOLATION};

/// Bivariate (p,q)-Bleimann-Butzer-Hahn operators: identity checks, moments,
/// convergence tables and rate-bound reports.
#[derive(Parser)]
#[command(name = "pqbbh", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the exact and floating-point identity suites and write a JSON report
    Verify(Settings),
    /// Closed-form against directly summed moments on the grid, as CSV
    Moments(Settings),
    /// Grid sup errors over a list of degrees, as CSV
    Converge(Settings),
    /// Per-point rate bounds with a summary line per function, as CSV
    Rate(Settings),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Verify(s) => (Command::Verify, s),
        Cmd::Moments(s) => (Command::Moments, s),
        Cmd::Converge(s) => (Command::Converge, s),
        Cmd::Rate(s) => (Command::Rate, s),
    };
    match execute(command, flags) {
        Ok(artifact) => {
            eprint!("{}", artifact.summary);
            if artifact.violations > 0 {
                eprintln!("{} property violation(s)", artifact.violations);
                ExitCode::from(EXIT_VIOLATION)
            } else {
                ExitCode::from(EXIT_OK)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
