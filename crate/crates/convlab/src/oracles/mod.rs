//! Independent numerical cross-checks for the policy analytics.
//!
//! The closed-form rates in [`crate::analytics`] rest on three pieces of
//! machinery, each verified here by an independent route:
//!
//! - Hermite-polynomial covariance identities for nonlinear transforms of
//!   correlated Gaussians ([`hermite`]), checked by tensor-product
//!   Gauss–Hermite quadrature.
//! - Occupation-time (level-hitting) moments of the mean-reverting process
//!   ([`occupation`]), checked by band-indicator Monte Carlo and direct
//!   lag-domain quadrature.
//! - The variance-growth dichotomy between linear and nonlinear smooth rules
//!   ([`variance_growth`]), checked by ensemble regression of `Var(u_t)`
//!   against time.

pub mod hermite;
pub mod occupation;
pub mod variance_growth;

pub use hermite::{
    cov_bruteforce, dpolicy_variance_rate, hermite_coefficients, hermite_normalized,
    polynomial_cov, variance_under_normal, GaussianPair, PolynomialPolicy,
};
pub use occupation::{
    delta_integral_variance_mc, delta_mean_mc, delta_second_moment, delta_second_moment_mc,
    theta, theta_integral, threshold_wealth_variance_rate, IntegralVarianceMcConfig,
    OccupationMcConfig,
};
pub use variance_growth::{variance_growth_rate_mc, VarianceGrowthConfig, VarianceGrowthEstimate};
