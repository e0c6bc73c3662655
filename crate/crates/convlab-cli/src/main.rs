mod cli;
mod commands;
mod manifest;
mod output;

use clap::Parser;
use std::process::ExitCode;

/// Exit codes: 0 success, 2 validation error, 3 numerical-tolerance failure,
/// 4 I/O failure — CI can tell math regressions from environment issues.
fn main() -> ExitCode {
    let parsed = cli::Cli::parse();
    match commands::dispatch(parsed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}
