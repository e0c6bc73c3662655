//! Closed-form growth and risk rates of leverage policies.
//!
//! For a simple threshold rule with trigger `S` and fixed leverage `L` the
//! log-wealth drift and variance grow linearly in time with rates
//!
//! ```text
//! c1(L, S) = sigma^2 L phi(S)
//! c2(L, S) = (sigma^2 L phi(S))^2 psi(S)
//! ```
//!
//! where `phi(S)` is the stationary Gaussian density at the trigger and
//! `psi(S)` the variance-rate factor
//!
//! ```text
//! psi(S) = (1 / sqrt(2 pi Sigma)) (2 / alpha)
//!          ∫_0^1 (1/xi) [ (1 - xi^2)^{-1/2} exp(S^2/Sigma * xi/(1+xi)) - 1 ] dxi,
//! ```
//!
//! with the closed form `psi(0) = 2 ln 2 / (alpha sqrt(2 pi Sigma))`. The
//! investor's objective is the asymptotic mean-variance utility
//! `U = c1 - gamma c2`; maximizing over `L` at fixed `S` gives
//! `L(S) = 1 / (4 gamma alpha Sigma phi(S) psi(S))` and the reduced utility
//! `U(S) = 1 / (4 gamma psi(S))`, which is largest at `S = 0` with
//! `L = pi / (4 gamma ln 2)` independent of the process parameters.
//!
//! Note a normalization subtlety checked by the verification suite: the
//! long-run variance of the level-occupation functional `∫ delta_S(x_t) dt`
//! equals `sqrt(2 pi Sigma) * phi(S)^2 psi(S) * T` under the definition of
//! `psi` above (see [`crate::oracles::occupation`]).

use crate::error::{Error, Result};
use crate::process::OuParams;
use crate::quad;
use std::f64::consts::PI;

/// Weight `gamma >= 0` on the variance growth rate; `gamma = 0` is the pure
/// growth-rate (Kelly) objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPreference {
    gamma: f64,
}

impl RiskPreference {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite and >= 0, got {gamma}"),
            ));
        }
        Ok(Self { gamma })
    }

    /// The growth-optimal investor: `gamma = 0`.
    pub fn kelly() -> Self {
        Self { gamma: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Growth rate, variance rate and utility of a threshold rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdAnalytics {
    /// Expected log-wealth growth per unit time (`c1`).
    pub growth_rate: f64,
    /// Log-wealth variance growth per unit time (`c2`).
    pub variance_rate: f64,
    /// `c1 - gamma * c2`.
    pub utility: f64,
}

/// Rates of the linear rule `f(x) = -k x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPolicyRates {
    /// Expected log-wealth growth per unit time, `sigma^2 k / 2`.
    pub growth_rate: f64,
    /// Asymptotic variance growth per unit time: zero, the linear rule is
    /// riskless in the long run.
    pub variance_rate: f64,
    /// Limit of `Var(u_t)` from a deterministic start, `k^2 Sigma^2 / 2`.
    pub long_run_wealth_variance: f64,
}

/// The utility-maximizing threshold policy: trigger zero, leverage
/// `pi / (4 gamma ln 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalThresholdPolicy {
    pub threshold: f64,
    pub leverage: f64,
    pub utility: f64,
}

/// Stationary Gaussian density at the trigger level,
/// `phi(S) = exp(-S^2 / (2 Sigma)) / sqrt(2 pi Sigma)`.
pub fn phi(threshold: f64, stationary_variance: f64) -> Result<f64> {
    if !stationary_variance.is_finite() || stationary_variance <= 0.0 {
        return Err(Error::invalid(
            "stationary_variance",
            format!("must be finite and > 0, got {stationary_variance}"),
        ));
    }
    if !threshold.is_finite() {
        return Err(Error::invalid("threshold", "must be finite"));
    }
    let q = threshold * threshold / stationary_variance;
    Ok((-0.5 * q).exp() / (2.0 * PI * stationary_variance).sqrt())
}

const PSI_ABS_TOL: f64 = 1e-10;
const PSI_SPLIT: f64 = 1.0 - 1e-6;

/// Variance-rate factor `psi(S)` by adaptive quadrature.
///
/// The integrand has a removable singularity at `xi = 0`, evaluated through
/// `expm1` of the combined exponent to dodge cancellation, and an integrable
/// `1/sqrt(1 - xi)` singularity at `xi = 1`, defused on the last sliver by
/// the substitution `xi = 1 - w^2`.
pub fn psi(threshold: f64, alpha: f64, stationary_variance: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::invalid("alpha", format!("must be finite and > 0, got {alpha}")));
    }
    if !stationary_variance.is_finite() || stationary_variance <= 0.0 {
        return Err(Error::invalid(
            "stationary_variance",
            format!("must be finite and > 0, got {stationary_variance}"),
        ));
    }
    if !threshold.is_finite() {
        return Err(Error::invalid("threshold", "must be finite"));
    }
    let q = threshold * threshold / stationary_variance;
    // the integral grows like exp(q/2); past this point it overflows f64
    if q > 1300.0 {
        return Err(Error::invalid(
            "threshold",
            format!("psi overflows beyond ~36 stationary deviations (S^2/Sigma = {q:.1})"),
        ));
    }
    let integral = psi_integral(q, PSI_ABS_TOL)?;
    Ok(2.0 / (alpha * (2.0 * PI * stationary_variance).sqrt()) * integral)
}

/// `[ (1 - xi^2)^{-1/2} exp(q xi/(1+xi)) - 1 ] / xi` in a cancellation-free
/// form: the bracket is `expm1` of `-ln(1 - xi^2)/2 + q xi/(1+xi)`.
fn psi_integrand(q: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        return q; // limiting value
    }
    let log_root = -0.5 * (-xi * xi).ln_1p();
    let expo = q * xi / (1.0 + xi);
    (log_root + expo).exp_m1() / xi
}

/// The dimensionless integral in `psi` as a function of `q = S^2 / Sigma`.
pub(crate) fn psi_integral(q: f64, abs_tol: f64) -> Result<f64> {
    let main = quad::integrate(|xi| psi_integrand(q, xi), 0.0, PSI_SPLIT, 0.5 * abs_tol)?;
    // Right sliver under xi = 1 - w^2: the 1/sqrt(1 - xi) blow-up cancels
    // against d(xi) = -2 w dw.
    let w_max = (1.0 - PSI_SPLIT).sqrt();
    let sliver = quad::integrate(
        |w| {
            let xi = 1.0 - w * w;
            let growth = (q * xi / (1.0 + xi)).exp();
            2.0 * growth / ((2.0 - w * w).sqrt() * xi) - 2.0 * w / xi
        },
        0.0,
        w_max,
        0.5 * abs_tol,
    )?;
    Ok(main.value + sliver.value)
}

/// Closed form `psi(0) = 2 ln 2 / (alpha sqrt(2 pi Sigma))`.
pub fn psi_at_zero(alpha: f64, stationary_variance: f64) -> f64 {
    2.0 * std::f64::consts::LN_2 / (alpha * (2.0 * PI * stationary_variance).sqrt())
}

/// Growth and variance rates of the simple threshold rule with trigger
/// `threshold` and leverage `leverage`.
pub fn threshold_rates(
    leverage: f64,
    threshold: f64,
    params: &OuParams,
    pref: &RiskPreference,
) -> Result<ThresholdAnalytics> {
    if !leverage.is_finite() || leverage < 0.0 {
        return Err(Error::invalid(
            "leverage",
            format!("must be finite and >= 0, got {leverage}"),
        ));
    }
    let sigma_sq = params.sigma() * params.sigma();
    let stat_var = params.stationary_variance();
    let c1 = sigma_sq * leverage * phi(threshold, stat_var)?;
    let c2 = c1 * c1 * psi(threshold, params.alpha(), stat_var)?;
    Ok(ThresholdAnalytics {
        growth_rate: c1,
        variance_rate: c2,
        utility: c1 - pref.gamma() * c2,
    })
}

/// Utility-maximizing leverage at a fixed trigger,
/// `L(S) = 1 / (4 gamma alpha Sigma phi(S) psi(S))`.
pub fn optimal_leverage_given_threshold(
    threshold: f64,
    params: &OuParams,
    pref: &RiskPreference,
) -> Result<f64> {
    if pref.gamma() == 0.0 {
        return Err(Error::UnboundedLeverage);
    }
    let stat_var = params.stationary_variance();
    let density = phi(threshold, stat_var)?;
    let factor = psi(threshold, params.alpha(), stat_var)?;
    Ok(1.0 / (4.0 * pref.gamma() * params.alpha() * stat_var * density * factor))
}

/// Utility at the optimal leverage, `U(S) = 1 / (4 gamma psi(S))`;
/// decreasing in `S`, so the best trigger is zero.
pub fn reduced_utility(threshold: f64, params: &OuParams, pref: &RiskPreference) -> Result<f64> {
    if pref.gamma() == 0.0 {
        return Err(Error::UnboundedLeverage);
    }
    let factor = psi(threshold, params.alpha(), params.stationary_variance())?;
    Ok(1.0 / (4.0 * pref.gamma() * factor))
}

/// The overall optimum: trigger zero, `L = pi / (4 gamma ln 2)` (independent
/// of the process parameters) and `U = alpha sqrt(2 pi Sigma) / (8 gamma ln 2)`.
pub fn optimal_threshold_policy(
    params: &OuParams,
    pref: &RiskPreference,
) -> Result<OptimalThresholdPolicy> {
    if pref.gamma() == 0.0 {
        return Err(Error::UnboundedLeverage);
    }
    let ln2 = std::f64::consts::LN_2;
    let leverage = PI / (4.0 * pref.gamma() * ln2);
    let utility = params.alpha() * (2.0 * PI * params.stationary_variance()).sqrt()
        / (8.0 * pref.gamma() * ln2);
    Ok(OptimalThresholdPolicy {
        threshold: 0.0,
        leverage,
        utility,
    })
}

/// Rates of the linear rule `f(x) = -k x`: growth `sigma^2 k / 2`, no
/// asymptotic variance growth, and `Var(u_t) -> k^2 Sigma^2 / 2` from a
/// deterministic start (a stationary start doubles the limit).
pub fn linear_policy_rates(k: f64, params: &OuParams) -> Result<LinearPolicyRates> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::invalid("k", format!("must be finite and >= 0, got {k}")));
    }
    let sigma_sq = params.sigma() * params.sigma();
    let stat_var = params.stationary_variance();
    Ok(LinearPolicyRates {
        growth_rate: 0.5 * sigma_sq * k,
        variance_rate: 0.0,
        long_run_wealth_variance: 0.5 * k * k * stat_var * stat_var,
    })
}

/// Utility of a wealth following geometric Brownian motion with drift `mu`
/// and volatility `sigma`: `U = mu - gamma sigma^2`.
pub fn gbm_utility(mu: f64, sigma: f64, pref: &RiskPreference) -> f64 {
    mu - pref.gamma() * sigma * sigma
}
