//! Level-occupation (local-time) moments of the mean-reverting process.
//!
//! The density of time the stationary process spends at a level `S` is
//! captured by the generalized process `delta_{t,S} = delta_S(x_t)`,
//! approximated by the band indicator `(1/Δ) 1{x_t in [S, S+Δ]}`. Its
//! moments are known in closed form:
//!
//! ```text
//! E(delta_{t,S})              = phi(S)
//! E(delta_{t1,S} delta_{t2,S}) = exp(-S^2/Sigma * 1/(1+a)) / (2 pi Sigma sqrt(1-a^2)),
//! ```
//!
//! with `a = exp(-alpha |t2 - t1|)`. The lag covariance
//! `theta(tau, S) = E(delta delta) - phi^2` decays exponentially, and the
//! occupation integral `∫_0^T delta_S(x_t) dt` has long-run variance
//! `2 T ∫_0^∞ theta dtau`, which equals `sqrt(2 pi Sigma) phi(S)^2 psi(S) T`
//! in terms of the variance-rate factor of [`crate::analytics::psi`].
//!
//! Everything is verified twice: the closed forms against band-indicator
//! Monte Carlo, and the lag integral against the `psi` quadrature.

use crate::analytics;
use crate::error::{Error, Result};
use crate::exec::map_streams;
use crate::process::{simulate_with, OuParams, PathGrid, Start};
use crate::quad;
use crate::stats::{self, McEstimate};
use std::f64::consts::PI;

/// Settings for single-path band-indicator estimators.
#[derive(Debug, Clone, Copy)]
pub struct OccupationMcConfig {
    /// Band width Δ of the indicator `(1/Δ) 1{x in [S, S+Δ]}`.
    pub band: f64,
    /// Simulation step.
    pub dt: f64,
    /// Number of steps of the single stationary path.
    pub n_steps: u64,
    pub seed: u64,
}

/// Settings for the across-realization variance of the occupation integral.
#[derive(Debug, Clone, Copy)]
pub struct IntegralVarianceMcConfig {
    pub band: f64,
    pub dt: f64,
    /// Horizon `T` of each realization, in time units (`alpha T >> 1`).
    pub horizon: f64,
    pub n_realizations: u64,
    pub seed: u64,
}

fn validate_band(band: f64) -> Result<()> {
    if !band.is_finite() || band <= 0.0 {
        return Err(Error::invalid("band", format!("must be finite and > 0, got {band}")));
    }
    Ok(())
}

/// Time-average of the band indicator over one long stationary path;
/// converges to `phi(S)` as the band shrinks. Batch-means error bars.
pub fn delta_mean_mc(level: f64, params: &OuParams, cfg: &OccupationMcConfig) -> Result<McEstimate> {
    validate_band(cfg.band)?;
    let grid = PathGrid::new(cfg.dt, cfg.n_steps, cfg.seed)?;
    let path = simulate_with(params, &grid, Start::Stationary, 0);
    let hi = level + cfg.band;
    let inv = 1.0 / cfg.band;
    let indicators: Vec<f64> = path
        .values()
        .iter()
        .map(|&x| if x >= level && x <= hi { inv } else { 0.0 })
        .collect();
    stats::batch_means(&indicators, stats::BATCH_COUNT)
        .ok_or_else(|| Error::invalid("n_steps", "too few steps for batch means"))
}

/// Closed-form second moment `E(delta_{t1,S} delta_{t2,S})` at lag `tau`.
/// Diverges at `tau = 0` (the delta process has no zero-lag moment).
pub fn delta_second_moment(level: f64, tau: f64, params: &OuParams) -> Result<f64> {
    if tau == 0.0 {
        return Err(Error::SingularLag);
    }
    let stat_var = params.stationary_variance();
    let a = (-params.alpha() * tau.abs()).exp();
    let q = level * level / stat_var;
    Ok((-q / (1.0 + a)).exp() / (2.0 * PI * stat_var * (1.0 - a * a).sqrt()))
}

/// Monte-Carlo check of the two-time band product at lag `tau` along one
/// stationary path.
pub fn delta_second_moment_mc(
    level: f64,
    tau: f64,
    params: &OuParams,
    cfg: &OccupationMcConfig,
) -> Result<McEstimate> {
    validate_band(cfg.band)?;
    if tau <= 0.0 {
        return Err(Error::SingularLag);
    }
    let lag = (tau / cfg.dt).round() as usize;
    if lag == 0 {
        return Err(Error::invalid("tau", "lag must cover at least one step"));
    }
    let grid = PathGrid::new(cfg.dt, cfg.n_steps, cfg.seed)?;
    let path = simulate_with(params, &grid, Start::Stationary, 0);
    let hi = level + cfg.band;
    let inv = 1.0 / cfg.band;
    let xs = path.values();
    let products: Vec<f64> = (0..xs.len() - lag)
        .map(|k| {
            let a = if xs[k] >= level && xs[k] <= hi { inv } else { 0.0 };
            let b = if xs[k + lag] >= level && xs[k + lag] <= hi {
                inv
            } else {
                0.0
            };
            a * b
        })
        .collect();
    stats::batch_means(&products, stats::BATCH_COUNT)
        .ok_or_else(|| Error::invalid("n_steps", "too few steps for batch means"))
}

/// Lag covariance `theta(tau, S) = E(delta delta) - phi(S)^2`. Positive and
/// diverging like the inverse square root of the lag as `tau -> 0`, decaying
/// exponentially for large `tau`.
pub fn theta(tau: f64, level: f64, params: &OuParams) -> Result<f64> {
    let density = analytics::phi(level, params.stationary_variance())?;
    Ok(delta_second_moment(level, tau, params)? - density * density)
}

/// Two-level lag covariance `Cov(delta_S(x_0), delta_{-S}(x_tau))`; needed
/// for the wealth variance of two-sided threshold rules, whose triggers sit
/// at both `+S` and `-S`. Negative at moderate levels: hitting one trigger
/// makes hitting the opposite one soon unlikely under mean reversion.
pub fn theta_cross(tau: f64, level: f64, params: &OuParams) -> Result<f64> {
    if tau == 0.0 {
        return Err(Error::SingularLag);
    }
    let stat_var = params.stationary_variance();
    let a = (-params.alpha() * tau.abs()).exp();
    let q = level * level / stat_var;
    let joint = (-q / (1.0 - a)).exp() / (2.0 * PI * stat_var * (1.0 - a * a).sqrt());
    let density = analytics::phi(level, stat_var)?;
    Ok(joint - density * density)
}

const THETA_TAIL_ALPHA_TAU: f64 = 40.0;

/// `∫_0^∞ theta(tau, S) dtau` by quadrature in the lag domain. The
/// substitution `tau = w^2` absorbs the inverse-square-root blow-up at zero
/// lag; beyond `alpha tau = 40` the integrand is below 1e-16 of the result
/// and is dropped.
pub fn theta_integral(level: f64, params: &OuParams) -> Result<f64> {
    let alpha = params.alpha();
    let stat_var = params.stationary_variance();
    let q = level * level / stat_var;
    let phi_sq = (-q).exp() / (2.0 * PI * stat_var);
    // theta(tau) = phi^2 expm1(-ln(1-a^2)/2 + q a/(1+a)), a = exp(-alpha tau),
    // with 1 - a carried as -expm1(-alpha tau) so tiny lags stay accurate
    let f = move |tau: f64| {
        let gap = -(-alpha * tau).exp_m1(); // 1 - a
        let a = 1.0 - gap;
        let log_root = -0.5 * (gap.ln() + (2.0 - gap).ln());
        phi_sq * (log_root + q * a / (1.0 + a)).exp_m1()
    };
    // 2w theta(w^2) -> e^{-q/2} / (pi Sigma sqrt(2 alpha)) as w -> 0
    let limit = (-0.5 * q).exp() / (PI * stat_var * (2.0 * alpha).sqrt());
    lag_integral(alpha, f, limit)
}

/// Same lag integral for the two-level covariance `theta_{S,-S}`.
pub fn theta_cross_integral(level: f64, params: &OuParams) -> Result<f64> {
    let alpha = params.alpha();
    let stat_var = params.stationary_variance();
    let q = level * level / stat_var;
    let phi_sq = (-q).exp() / (2.0 * PI * stat_var);
    // theta_cross(tau) = phi^2 expm1(-ln(1-a^2)/2 - q a/(1-a))
    let f = move |tau: f64| {
        let gap = -(-alpha * tau).exp_m1(); // 1 - a
        let a = 1.0 - gap;
        let log_root = -0.5 * (gap.ln() + (2.0 - gap).ln());
        phi_sq * (log_root - q * a / gap).exp_m1()
    };
    // for q > 0 the exp(-q/(1-a)) factor crushes the zero-lag blow-up;
    // at q = 0 the cross integrand coincides with the same-level one
    let limit = if q == 0.0 {
        1.0 / (PI * stat_var * (2.0 * alpha).sqrt())
    } else {
        0.0
    };
    lag_integral(alpha, f, limit)
}

fn lag_integral(alpha: f64, f: impl Fn(f64) -> f64, limit_at_zero: f64) -> Result<f64> {
    let w_max = (THETA_TAIL_ALPHA_TAU / alpha).sqrt();
    let integrand = move |w: f64| {
        if w < 1e-12 {
            limit_at_zero
        } else {
            2.0 * w * f(w * w)
        }
    };
    Ok(quad::integrate(integrand, 0.0, w_max, 1e-12)?.value)
}

/// Across-realization variance of the occupation integral
/// `∫_0^T (1/Δ) 1{x_t in [S, S+Δ]} dt`, divided by `T`. Converges to
/// `2 ∫_0^∞ theta dtau = sqrt(2 pi Sigma) phi(S)^2 psi(S)` as the band and
/// step shrink. The standard error uses the asymptotic variance of a sample
/// variance, `SE ≈ v sqrt(2/(n-1))`.
pub fn delta_integral_variance_mc(
    level: f64,
    params: &OuParams,
    cfg: &IntegralVarianceMcConfig,
) -> Result<McEstimate> {
    validate_band(cfg.band)?;
    if cfg.n_realizations < 2 {
        return Err(Error::invalid("n_realizations", "need at least 2"));
    }
    let n_steps = (cfg.horizon / cfg.dt).round() as u64;
    let grid = PathGrid::new(cfg.dt, n_steps.max(1), cfg.seed)?;
    let horizon = grid.horizon();
    let hi = level + cfg.band;
    let scale = cfg.dt / cfg.band;
    let integrals: Vec<f64> = map_streams(cfg.n_realizations, |stream| {
        let path = simulate_with(params, &grid, Start::Stationary, stream);
        path.values()
            .iter()
            .take(n_steps as usize)
            .map(|&x| if x >= level && x <= hi { scale } else { 0.0 })
            .sum::<f64>()
    });
    let variance = stats::sample_variance(&integrals).expect("n >= 2 checked above");
    let value = variance / horizon;
    let std_error = value * (2.0 / (cfg.n_realizations as f64 - 1.0)).sqrt();
    Ok(McEstimate { value, std_error })
}

/// Long-run wealth variance rate of the simple two-sided threshold rule with
/// trigger `S` and leverage `L`, by lag-domain quadrature:
///
/// ```text
/// rate = sigma^4 L^2 ( ∫_0^∞ theta_{S,S} dtau + ∫_0^∞ theta_{S,-S} dtau ).
/// ```
///
/// The wealth of the rule is `(sigma^2/2) L (Λ_{+S} + Λ_{-S})` plus bounded
/// terms, where `Λ` are the occupation densities at the two triggers, so both
/// the same-level and the cross-level covariances enter. At `S = 0` the two
/// coincide and the rate reduces to `sigma^4 L^2 * 2 ∫ theta dtau`.
pub fn threshold_wealth_variance_rate(
    level: f64,
    params: &OuParams,
    leverage: f64,
) -> Result<f64> {
    let sigma_sq = params.sigma() * params.sigma();
    let same = theta_integral(level, params)?;
    let cross = if level == 0.0 {
        same
    } else {
        theta_cross_integral(level, params)?
    };
    Ok(sigma_sq * sigma_sq * leverage * leverage * (same + cross))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_process() -> OuParams {
        OuParams::from_stationary_variance(1.0, 1.0).unwrap()
    }

    #[test]
    fn second_moment_limits() {
        let p = unit_process();
        // tau -> infinity: independence, so the moment tends to phi^2
        let phi0 = analytics::phi(1.0, 1.0).unwrap();
        let far = delta_second_moment(1.0, 50.0, &p).unwrap();
        assert_relative_eq!(far, phi0 * phi0, max_relative = 1e-10);
        // at S = 0 the exponent vanishes
        let v = delta_second_moment(0.0, 1.0, &p).unwrap();
        let a = (-1.0f64).exp();
        assert_relative_eq!(v, 1.0 / (2.0 * PI * (1.0 - a * a).sqrt()), max_relative = 1e-12);
        assert!(matches!(delta_second_moment(0.0, 0.0, &p), Err(Error::SingularLag)));
    }

    #[test]
    fn theta_decays_and_diverges_at_small_lag() {
        let p = unit_process();
        let phi0 = analytics::phi(0.5, 1.0).unwrap();
        // alpha tau = 20 leaves less than 1e-6 of phi^2
        let late = theta(20.0, 0.5, &p).unwrap();
        assert!(late.abs() <= 1e-6 * phi0 * phi0, "theta(20) = {late:e}");
        // small lags blow up like 1/sqrt(tau)
        let t1 = theta(1e-4, 0.0, &p).unwrap();
        let t2 = theta(4e-4, 0.0, &p).unwrap();
        assert!(t1 > 0.0 && t2 > 0.0);
        assert_relative_eq!(t1 / t2, 2.0, max_relative = 0.02);
    }

    #[test]
    fn band_mean_recovers_density() {
        let p = unit_process();
        let cfg = OccupationMcConfig {
            band: 0.01,
            dt: 0.05,
            n_steps: 1_000_000,
            seed: 31,
        };
        let est = delta_mean_mc(0.0, &p, &cfg).unwrap();
        let z = est.z_against(analytics::phi(0.0, 1.0).unwrap());
        assert!(z.abs() <= 3.0, "z = {z}");
        // indicator bound: a huge band estimates at most 1/band
        let wide = OccupationMcConfig {
            band: 100.0,
            dt: 0.05,
            n_steps: 10_000,
            seed: 31,
        };
        let est = delta_mean_mc(0.0, &p, &wide).unwrap();
        assert!(est.value <= 1.0 / 100.0 + 1e-12);
    }

    #[test]
    fn band_mean_ratio_matches_gaussian_shape() {
        let p = unit_process();
        let cfg = OccupationMcConfig {
            band: 0.02,
            dt: 0.05,
            n_steps: 2_000_000,
            seed: 37,
        };
        let at_zero = delta_mean_mc(0.0, &p, &cfg).unwrap();
        let at_sigma = delta_mean_mc(1.0, &p, &cfg).unwrap();
        let ratio = at_sigma.value / at_zero.value;
        // centered-band correction is second order; 5% is generous
        assert_relative_eq!(ratio, (-0.5f64).exp(), max_relative = 0.05);
    }

    #[test]
    fn second_moment_mc_matches_closed_form() {
        let p = unit_process();
        let cfg = OccupationMcConfig {
            band: 0.05,
            dt: 0.02,
            n_steps: 2_000_000,
            seed: 41,
        };
        let est = delta_second_moment_mc(0.0, 1.0, &p, &cfg).unwrap();
        let want = delta_second_moment(0.0, 1.0, &p).unwrap();
        let z = est.z_against(want);
        assert!(z.abs() <= 3.0, "z = {z}, est = {}, want = {want}", est.value);
    }

    #[test]
    fn lag_integral_closes_against_psi_quadrature() {
        // 2 ∫ theta dtau = sqrt(2 pi Sigma) phi^2 psi on a grid of levels —
        // two independent quadrature routes to the same number.
        for &(alpha, sigma_sq) in &[(1.0, 1.0), (0.5, 1e-4), (2.0, 0.04)] {
            let p = OuParams::from_stationary_variance(alpha, sigma_sq).unwrap();
            for mult in [0.0, 1.0, 2.0] {
                let level = mult * sigma_sq.sqrt();
                let lhs = 2.0 * theta_integral(level, &p).unwrap();
                let density = analytics::phi(level, sigma_sq).unwrap();
                let factor = analytics::psi(level, alpha, sigma_sq).unwrap();
                let rhs = (2.0 * PI * sigma_sq).sqrt() * density * density * factor;
                assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn occupation_integral_variance_matches_lag_integral() {
        let p = unit_process();
        let cfg = IntegralVarianceMcConfig {
            band: 0.05,
            dt: 3e-4,
            horizon: 100.0,
            n_realizations: 600,
            seed: 53,
        };
        for level in [0.0, 1.0] {
            let est = delta_integral_variance_mc(level, &p, &cfg).unwrap();
            let want = 2.0 * theta_integral(level, &p).unwrap();
            let rel = (est.value - want).abs() / want;
            assert!(
                rel <= 0.10,
                "level {level}: estimate {} vs {want}, rel {rel}",
                est.value
            );
        }
    }

    #[test]
    fn occupation_variance_stable_in_horizon_and_band() {
        let p = unit_process();
        let base = IntegralVarianceMcConfig {
            band: 0.06,
            dt: 4e-4,
            horizon: 100.0,
            n_realizations: 400,
            seed: 59,
        };
        let v1 = delta_integral_variance_mc(0.0, &p, &base).unwrap();
        let longer = IntegralVarianceMcConfig {
            horizon: 400.0,
            n_realizations: 150,
            ..base
        };
        let v2 = delta_integral_variance_mc(0.0, &p, &longer).unwrap();
        let spread = (v1.value - v2.value).abs();
        let err = (v1.std_error.powi(2) + v2.std_error.powi(2)).sqrt();
        assert!(spread <= 3.0 * err, "T-instability: {} vs {}", v1.value, v2.value);

        let halved = IntegralVarianceMcConfig {
            band: 0.03,
            dt: 1e-4,
            ..base
        };
        let v3 = delta_integral_variance_mc(0.0, &p, &halved).unwrap();
        let err = (v1.std_error.powi(2) + v3.std_error.powi(2)).sqrt();
        assert!(
            (v1.value - v3.value).abs() <= 3.0 * err,
            "band-instability: {} vs {}",
            v1.value,
            v3.value
        );
    }

    #[test]
    fn cross_level_integral_is_negative_at_moderate_levels() {
        // hitting +S makes hitting -S soon unlikely under mean reversion
        let p = unit_process();
        let cross = theta_cross_integral(1.0, &p).unwrap();
        assert!(cross < 0.0, "cross integral = {cross}");
        let same = theta_integral(1.0, &p).unwrap();
        assert!(same > 0.0);
        assert!(same + cross > 0.0, "total variance must stay positive");
    }

    #[test]
    fn wealth_variance_rate_reduces_at_zero_level() {
        let p = unit_process();
        let sigma4 = (p.sigma() * p.sigma()).powi(2);
        let rate = threshold_wealth_variance_rate(0.0, &p, 1.0).unwrap();
        let twice = sigma4 * 2.0 * theta_integral(0.0, &p).unwrap();
        assert_relative_eq!(rate, twice, max_relative = 1e-12);
    }
}
