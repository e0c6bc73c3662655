//! Monte-Carlo backtest of threshold strategies over a grid.
//!
//! A configured experiment draws `n_realizations` stationary AR(1) paths of
//! `horizon` datapoints, runs each candidate `(S, s)` rule on every path with
//! the round-trip transaction cost, and aggregates the per-realization
//! average daily return (difference of terminal and initial log wealth over
//! the number of days). All cells share the same realization streams
//! (common random numbers), so comparisons across strategies are driven by
//! the strategies, not by sampling noise, and the whole grid is a pure
//! function of the configuration.
//!
//! Wealth is simulated at unit leverage and scaled afterwards: every term of
//! the log-wealth recursion (position and cost alike) is proportional to
//! `L`, so the mean and standard deviation scale together and the Sharpe
//! ratio is exactly leverage-invariant.

use crate::error::{Error, Result};
use crate::exec::map_streams;
use crate::policies::{realized_growth_stats, wealth_path, Policy, Sided, ThresholdPolicy};
use crate::process::{simulate_ar1, Ar1Params, PathGrid, Start};
use crate::stats;

/// The experiment protocol: process, sample sizes, cost, seeding and
/// sidedness of the rules.
#[derive(Debug, Clone, Copy)]
pub struct BacktestConfig {
    pub process: Ar1Params,
    pub n_realizations: u64,
    /// Datapoints per realization (path length; one less step).
    pub horizon: u64,
    /// Round-trip transaction cost as a fraction of the position.
    pub cost: f64,
    pub master_seed: u64,
    pub sided: Sided,
}

impl BacktestConfig {
    pub fn new(
        process: Ar1Params,
        n_realizations: u64,
        horizon: u64,
        cost: f64,
        master_seed: u64,
        sided: Sided,
    ) -> Result<Self> {
        if n_realizations == 0 {
            return Err(Error::invalid("n_realizations", "must be at least 1"));
        }
        if horizon < 2 {
            return Err(Error::invalid("horizon", "need at least 2 datapoints"));
        }
        if !cost.is_finite() || cost < 0.0 {
            return Err(Error::invalid("cost", format!("must be finite and >= 0, got {cost}")));
        }
        Ok(Self {
            process,
            n_realizations,
            horizon,
            cost,
            master_seed,
            sided,
        })
    }

    fn steps(&self) -> u64 {
        self.horizon - 1
    }
}

/// Distribution of the average daily return across realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnStats {
    /// Mean over realizations of `(u_T - u_0) / days`.
    pub mean_daily: f64,
    /// Standard deviation of that statistic, undefined for one realization.
    pub std_daily: Option<f64>,
    /// `mean_daily / std_daily`, defined only when the deviation is positive.
    pub sharpe: Option<f64>,
    pub n: u64,
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub open_threshold: f64,
    pub close_threshold: f64,
    pub stats: ReturnStats,
}

/// The strategy grid: for every open threshold `S` the list of close
/// thresholds `s <= S` to pair with it.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGrid {
    open_values: Vec<f64>,
    close_values: Vec<Vec<f64>>,
}

impl StrategyGrid {
    /// Pair every open threshold with every candidate close threshold not
    /// exceeding it. Both lists are sorted and deduplicated.
    pub fn from_candidates(open: Vec<f64>, close: Vec<f64>) -> Result<Self> {
        if open.is_empty() {
            return Err(Error::invalid("open", "need at least one open threshold"));
        }
        if open.iter().chain(&close).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("grid", "thresholds must be finite and >= 0"));
        }
        let mut open = open;
        open.sort_by(f64::total_cmp);
        open.dedup();
        let mut close = close;
        close.sort_by(f64::total_cmp);
        close.dedup();
        let close_values: Vec<Vec<f64>> = open
            .iter()
            .map(|&s_open| {
                let mut list: Vec<f64> =
                    close.iter().copied().filter(|&s| s <= s_open).collect();
                if list.is_empty() {
                    list.push(s_open); // fall back to the simple rule
                }
                list
            })
            .collect();
        Ok(Self {
            open_values: open,
            close_values,
        })
    }

    /// Evenly spaced candidates `start, start+step, ..., stop` (inclusive
    /// within floating-point slack).
    pub fn axis(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid("step", "must be finite and > 0"));
        }
        if stop < start {
            return Err(Error::invalid("axis", "stop must be >= start"));
        }
        let n = ((stop - start) / step + 0.5).floor() as usize;
        Ok((0..=n).map(|i| start + step * i as f64).collect())
    }

    pub fn open_values(&self) -> &[f64] {
        &self.open_values
    }

    pub fn close_values_for(&self, idx: usize) -> &[f64] {
        &self.close_values[idx]
    }

    pub fn n_cells(&self) -> usize {
        self.close_values.iter().map(Vec::len).sum()
    }
}

/// Full grid of evaluated cells, row-major in (open, close).
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
}

/// Which statistic a contour table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mean,
    Std,
    Sharpe,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Std => "std",
            Metric::Sharpe => "sharpe",
        }
    }

    fn of(&self, stats: &ReturnStats) -> Option<f64> {
        match self {
            Metric::Mean => Some(stats.mean_daily),
            Metric::Std => stats.std_daily,
            Metric::Sharpe => stats.sharpe,
        }
    }
}

impl GridResult {
    /// The cell maximizing `metric`; cells where it is undefined are skipped.
    pub fn argmax(&self, metric: Metric) -> Option<&GridCell> {
        self.cells
            .iter()
            .filter_map(|c| metric.of(&c.stats).map(|v| (c, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    }

    /// Cells sharing one open threshold, ordered by close threshold.
    pub fn slice(&self, open_threshold: f64) -> Vec<&GridCell> {
        let mut cells: Vec<&GridCell> = self
            .cells
            .iter()
            .filter(|c| c.open_threshold == open_threshold)
            .collect();
        cells.sort_by(|a, b| a.close_threshold.total_cmp(&b.close_threshold));
        cells
    }
}

/// Run one threshold strategy over the configured ensemble. Realization `i`
/// uses stream `(master_seed, i)`; the statistics are aggregated in stream
/// order, so the result does not depend on scheduling.
pub fn run_strategy(config: &BacktestConfig, policy: &ThresholdPolicy) -> Result<ReturnStats> {
    let unit = ThresholdPolicy::new(policy.open_threshold(), policy.close_threshold(), 1.0)?
        .with_sided(config.sided);
    let grid = PathGrid::new(1.0, config.steps(), config.master_seed)?;
    let cost = config.cost;
    let process = config.process;
    let daily: Vec<f64> = map_streams(config.n_realizations, move |stream| {
        let path = simulate_ar1(&process, &grid, Start::Stationary, stream);
        let wealth = wealth_path(&path, &Policy::Threshold(unit), cost)
            .expect("cost validated by the config");
        realized_growth_stats(&wealth, 1.0).growth_rate // per datapoint
    });
    Ok(aggregate(&daily, policy.leverage()))
}

fn aggregate(daily_unit_leverage: &[f64], leverage: f64) -> ReturnStats {
    let mean_daily = leverage * stats::mean(daily_unit_leverage);
    let std_daily = stats::sample_std(daily_unit_leverage).map(|s| leverage * s);
    let sharpe = std_daily.and_then(|s| if s > 0.0 { Some(mean_daily / s) } else { None });
    ReturnStats {
        mean_daily,
        std_daily,
        sharpe,
        n: daily_unit_leverage.len() as u64,
    }
}

/// Evaluate every cell of `grid` under common random numbers. Cells run
/// independently (possibly in parallel); each regenerates the same
/// realization streams, so a one-cell grid is bit-identical to
/// [`run_strategy`].
pub fn grid_search(config: &BacktestConfig, grid: &StrategyGrid) -> Result<GridResult> {
    let mut pairs = Vec::with_capacity(grid.n_cells());
    for (i, &open) in grid.open_values().iter().enumerate() {
        for &close in grid.close_values_for(i) {
            pairs.push((open, close));
        }
    }
    let config = *config;
    let cells: Vec<Result<GridCell>> = map_streams(pairs.len() as u64, |idx| {
        let (open, close) = pairs[idx as usize];
        let policy = ThresholdPolicy::new(open, close, 1.0)?;
        Ok(GridCell {
            open_threshold: open,
            close_threshold: close,
            stats: run_strategy(&config, &policy)?,
        })
    });
    Ok(GridResult {
        cells: cells.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

/// A row of the long-format contour table: thresholds in percent, the value
/// of the metric (missing where undefined).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourRow {
    /// Open threshold `S` in percent.
    pub open_pct: f64,
    /// Spread `S - s` in percent.
    pub spread_pct: f64,
    pub value: Option<f64>,
}

/// Reshape a grid result into the plot-ready long format, axes in percent.
pub fn emit_contours(result: &GridResult, metric: Metric) -> Vec<ContourRow> {
    result
        .cells
        .iter()
        .map(|c| ContourRow {
            open_pct: 100.0 * c.open_threshold,
            spread_pct: 100.0 * (c.open_threshold - c.close_threshold),
            value: metric.of(&c.stats),
        })
        .collect()
}
