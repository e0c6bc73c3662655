//! Ensemble estimate of the log-wealth variance growth rate.
//!
//! For a smooth rule `f` the wealth variance behaves like
//! `Var(u_t) ~ const + (sigma^4/4) r t` where
//! `r = lim Var(∫_0^t f'(x_s) ds) / t`. Linear rules have `r = 0`
//! (asymptotically constant variance, the long-run riskless case); any
//! nonlinear smooth rule has `r > 0`. The estimator regresses the
//! across-realization variance of `u_t` on `t` over the latter half of the
//! horizon and jackknifes the realizations for the slope's standard error.
//!
//! The quadrature-side oracle for `r` is
//! [`crate::oracles::hermite::dpolicy_variance_rate`], the Hermite-expansion
//! identity `r = (2/alpha) Σ_k b_k^2 / k` with `b_k` the coefficients of
//! `f'` under the stationary Gaussian.

use crate::error::{Error, Result};
use crate::exec::map_streams;
use crate::policies::{Policy, PositionState};
use crate::process::{stream_rng, OuParams};
use crate::stats;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy)]
pub struct VarianceGrowthConfig {
    /// Simulation step; keep `alpha dt` and `sigma^4 k^2 dt` small, the
    /// discrete recursion itself adds an O(dt) variance slope.
    pub dt: f64,
    /// Horizon `T` of each realization, in time units.
    pub horizon: f64,
    pub n_realizations: u64,
    /// Number of equally spaced times at which `Var(u_t)` is recorded.
    pub n_checkpoints: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceGrowthEstimate {
    /// Estimated `r = slope / (sigma^4 / 4)`.
    pub rate: f64,
    pub rate_std_error: f64,
    /// Raw slope of `Var(u_t)` against `t` over the latter half.
    pub slope: f64,
    pub slope_std_error: f64,
    /// Slope in units of its standard error.
    pub slope_z: f64,
    /// Mean growth rate `E(u_T - u_0)/T` across realizations, for the
    /// drift-side cross-check.
    pub mean_growth_rate: f64,
}

/// Estimate the variance growth rate of `policy` under stationary starts.
pub fn variance_growth_rate_mc(
    policy: &Policy,
    params: &OuParams,
    cfg: &VarianceGrowthConfig,
) -> Result<VarianceGrowthEstimate> {
    if cfg.n_realizations < 8 {
        return Err(Error::invalid("n_realizations", "need at least 8"));
    }
    if cfg.n_checkpoints < 8 {
        return Err(Error::invalid("n_checkpoints", "need at least 8"));
    }
    if !(cfg.dt > 0.0) || !(cfg.horizon > 0.0) {
        return Err(Error::invalid("dt/horizon", "must be positive"));
    }
    let steps_per_checkpoint = (cfg.horizon / cfg.dt / cfg.n_checkpoints as f64)
        .round()
        .max(1.0) as u64;
    let n_checkpoints = cfg.n_checkpoints;
    let ar1 = params.to_ar1(cfg.dt);
    let beta = ar1.beta();
    let sigma_d = ar1.sigma_d();
    let stat_std = params.stationary_variance().sqrt();

    // u at each checkpoint, one row per realization
    let rows: Vec<Vec<f64>> = map_streams(cfg.n_realizations, |stream| {
        let mut rng = stream_rng(cfg.seed, stream);
        let z0: f64 = StandardNormal.sample(&mut rng);
        let mut x = stat_std * z0;
        let mut state = PositionState::flat();
        let mut u = 0.0;
        let mut row = Vec::with_capacity(n_checkpoints);
        for _ in 0..n_checkpoints {
            for _ in 0..steps_per_checkpoint {
                let (leverage, next) = policy.leverage_at(x, state);
                state = next;
                let z: f64 = StandardNormal.sample(&mut rng);
                let x_next = beta * x + sigma_d * z;
                u += leverage * (x_next - x);
                x = x_next;
            }
            row.push(u);
        }
        row
    });

    let n = cfg.n_realizations as usize;
    let dt_checkpoint = steps_per_checkpoint as f64 * cfg.dt;
    let fit_from = n_checkpoints / 2;
    let times: Vec<f64> = (fit_from..n_checkpoints)
        .map(|j| (j + 1) as f64 * dt_checkpoint)
        .collect();

    // running sums per checkpoint for cheap leave-one-out variances
    let mut sum = vec![0.0; n_checkpoints];
    let mut sum_sq = vec![0.0; n_checkpoints];
    for row in &rows {
        for (j, &u) in row.iter().enumerate() {
            sum[j] += u;
            sum_sq[j] += u * u;
        }
    }
    let full_var: Vec<f64> = (fit_from..n_checkpoints)
        .map(|j| variance_from_sums(sum[j], sum_sq[j], n))
        .collect();
    let (slope, _) = stats::ols_slope(&times, &full_var);

    // delete-one jackknife over realizations
    let mut pseudo = Vec::with_capacity(n);
    let mut loo_var = vec![0.0; times.len()];
    for row in &rows {
        for (idx, j) in (fit_from..n_checkpoints).enumerate() {
            let u = row[j];
            loo_var[idx] = variance_from_sums(sum[j] - u, sum_sq[j] - u * u, n - 1);
        }
        let (s, _) = stats::ols_slope(&times, &loo_var);
        pseudo.push(s);
    }
    let pseudo_mean = stats::mean(&pseudo);
    let jack_factor = (n - 1) as f64 / n as f64;
    let slope_var: f64 = pseudo
        .iter()
        .map(|s| (s - pseudo_mean) * (s - pseudo_mean))
        .sum::<f64>()
        * jack_factor;
    let slope_se = slope_var.sqrt();

    let quarter_sigma4 = 0.25 * params.sigma().powi(4);
    let growth: Vec<f64> = rows
        .iter()
        .map(|row| row[n_checkpoints - 1] / (n_checkpoints as f64 * dt_checkpoint))
        .collect();
    Ok(VarianceGrowthEstimate {
        rate: slope / quarter_sigma4,
        rate_std_error: slope_se / quarter_sigma4,
        slope,
        slope_std_error: slope_se,
        slope_z: slope / slope_se,
        mean_growth_rate: stats::mean(&growth),
    })
}

fn variance_from_sums(sum: f64, sum_sq: f64, n: usize) -> f64 {
    let nf = n as f64;
    ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0)
}
