//! Argument surface of the `convlab` binary.
//!
//! Thresholds, costs and mispricing levels are in natural log-price units
//! (0.005 means 0.5%); only the contour output files convert to percent.
//! The master seed falls back to the `CONVLAB_SEED` environment variable.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "convlab",
    version,
    about = "Mean-reversion trading laboratory: simulation, analytics, backtests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate phi, psi, optimal leverage and utility over thresholds
    Analyze(AnalyzeArgs),
    /// Simulate one mispricing path and the wealth of a policy on it
    Simulate(SimulateArgs),
    /// Run the Monte-Carlo strategy-grid backtest and emit contour tables
    Backtest(BacktestArgs),
    /// Fit the mispricing model to a date,price,nav CSV file
    Estimate(EstimateArgs),
    /// Run the numerical verification suite and report pass/fail per check
    #[command(name = "verify-appendix")]
    VerifyAppendix(VerifyArgs),
    /// Re-execute a command recorded in a run manifest
    Rerun(RerunArgs),
}

/// A list of grid values: either comma-separated (`0,0.005,0.01`) or a range
/// `start:stop:step` (inclusive of both ends within rounding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Axis(pub Vec<f64>);

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_one = |tok: &str| -> Result<f64, String> {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number {tok:?}"))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err("range must be start:stop:step".into());
            }
            let (start, stop, step) = (parse_one(parts[0])?, parse_one(parts[1])?, parse_one(parts[2])?);
            if !(step > 0.0) {
                return Err("step must be positive".into());
            }
            if stop < start {
                return Err("stop must be >= start".into());
            }
            let n = ((stop - start) / step + 0.5).floor() as usize;
            Ok(Axis((0..=n).map(|i| start + step * i as f64).collect()))
        } else {
            s.split(',').map(parse_one).collect::<Result<Vec<_>, _>>().map(Axis)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidedArg {
    /// Trigger on positive mispricing only
    One,
    /// Trigger on either sign
    Two,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Mean,
    Std,
    Sharpe,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Hold no position (baseline)
    None,
    /// f(x) = -k x
    Linear,
    /// Fixed leverage L against excursions beyond the thresholds
    Threshold,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CommonOpts {
    /// Master RNG seed (falls back to CONVLAB_SEED)
    #[arg(long, env = "CONVLAB_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker-thread cap; 0 picks the number of cores. Results do not depend
    /// on this setting.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Format of data files written by --out
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    pub format: OutFormat,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// Mean-reversion rate per unit time
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Diffusion volatility per sqrt(unit time)
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    /// Risk-aversion weight on the variance growth rate
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Thresholds to tabulate (comma list or start:stop:step)
    #[arg(long = "S", default_value = "0:0.02:0.0025")]
    pub thresholds: Axis,
    /// Write the table here (format per --format)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    /// Time step of the grid
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Number of steps to simulate
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    /// Initial mispricing
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Draw the start from the stationary law instead of --x0
    #[arg(long, default_value_t = false)]
    pub stationary: bool,
    #[arg(long, value_enum, default_value_t = PolicyKind::Linear)]
    pub policy: PolicyKind,
    /// Sensitivity of the linear rule
    #[arg(long, default_value_t = 20.0)]
    pub k: f64,
    /// Open threshold of the threshold rule
    #[arg(long = "S", default_value_t = 0.01)]
    pub open_threshold: f64,
    /// Close threshold of the threshold rule
    #[arg(long = "s", default_value_t = 0.0)]
    pub close_threshold: f64,
    /// Leverage of the threshold rule
    #[arg(long = "L", default_value_t = 1.0)]
    pub leverage: f64,
    /// Round-trip transaction cost
    #[arg(long, default_value_t = 0.0)]
    pub cost: f64,
    #[arg(long, value_enum, default_value_t = SidedArg::Two)]
    pub sided: SidedArg,
    /// Path CSV written here (columns step,t,x,u)
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a date,price,nav file (price = exp(x), nav = 1) for the
    /// estimate command
    #[arg(long)]
    pub price_csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BacktestArgs {
    /// One-step autocorrelation of the mispricing
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    /// One-step innovation standard deviation
    #[arg(long = "sigma-d", default_value_t = 0.01)]
    pub sigma_d: f64,
    /// Number of realizations
    #[arg(long, default_value_t = 100)]
    pub realizations: u64,
    /// Datapoints per realization
    #[arg(long, default_value_t = 1250)]
    pub steps: u64,
    /// Round-trip transaction cost
    #[arg(long, default_value_t = 0.0025)]
    pub cost: f64,
    /// Open thresholds (comma list or start:stop:step)
    #[arg(long = "S", default_value = "0.005:0.02:0.00125")]
    pub open_thresholds: Axis,
    /// Close-threshold candidates, filtered to s <= S per cell
    #[arg(long = "s", default_value = "0:0.02:0.00125")]
    pub close_thresholds: Axis,
    /// Leverage applied to every rule
    #[arg(long = "L", default_value_t = 1.0)]
    pub leverage: f64,
    #[arg(long, value_enum, default_value_t = SidedArg::Two)]
    pub sided: SidedArg,
    /// Which contour tables to write
    #[arg(long, value_enum, default_value_t = MetricArg::All)]
    pub metric: MetricArg,
    /// Output directory (grid table, contour tables, manifest)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EstimateArgs {
    /// Input CSV with header date,price,nav
    pub input: PathBuf,
    /// Also fit an intercept (diagnostic; default is the no-intercept model)
    #[arg(long, default_value_t = false)]
    pub intercept: bool,
    /// Time per observation, for the implied continuous parameters
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Write the report here (format per --format)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Scale factor on the Monte-Carlo tolerances (>1 loosens)
    #[arg(long = "tol-factor", default_value_t = 1.0)]
    pub tol_factor: f64,
    /// Smaller Monte-Carlo sample sizes (faster, wider error bars)
    #[arg(long, default_value_t = false)]
    pub quick: bool,
    /// Write the report here
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    /// Manifest written by a previous run
    pub manifest: PathBuf,
    /// Redirect outputs to this path instead of the recorded one
    #[arg(long)]
    pub out: Option<PathBuf>,
}
