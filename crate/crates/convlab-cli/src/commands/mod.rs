mod analyze;
mod backtest;
mod estimate;
mod simulate;
mod verify;

use crate::cli::{Cli, Command, RerunArgs};
use crate::manifest::RunManifest;
use crate::output::{CliError, CliResult};

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze(args) => analyze::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Backtest(args) => backtest::run(&args),
        Command::Estimate(args) => estimate::run(&args),
        Command::VerifyAppendix(args) => verify::run(&args),
        Command::Rerun(args) => rerun(&args),
    }
}

fn rerun(args: &RerunArgs) -> CliResult<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    let recorded = manifest.args.clone();
    match manifest.command.as_str() {
        "analyze" => {
            let mut parsed: crate::cli::AnalyzeArgs = serde_json::from_value(recorded)?;
            if let Some(out) = &args.out {
                parsed.out = Some(out.clone());
            }
            analyze::run(&parsed)
        }
        "simulate" => {
            let mut parsed: crate::cli::SimulateArgs = serde_json::from_value(recorded)?;
            if let Some(out) = &args.out {
                parsed.out = out.clone();
            }
            simulate::run(&parsed)
        }
        "backtest" => {
            let mut parsed: crate::cli::BacktestArgs = serde_json::from_value(recorded)?;
            if let Some(out) = &args.out {
                parsed.out = Some(out.clone());
            }
            backtest::run(&parsed)
        }
        "estimate" => {
            let mut parsed: crate::cli::EstimateArgs = serde_json::from_value(recorded)?;
            if let Some(out) = &args.out {
                parsed.out = Some(out.clone());
            }
            estimate::run(&parsed)
        }
        "verify-appendix" => {
            let mut parsed: crate::cli::VerifyArgs = serde_json::from_value(recorded)?;
            if let Some(out) = &args.out {
                parsed.out = Some(out.clone());
            }
            verify::run(&parsed)
        }
        other => Err(CliError::BadManifest(format!("unknown command {other:?}"))),
    }
}
