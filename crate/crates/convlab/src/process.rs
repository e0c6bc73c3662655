//! The mean-reverting mispricing process and its discrete counterpart.
//!
//! The mispricing `x_t = ln(p_actual / p_correct)` follows the
//! Ornstein–Uhlenbeck dynamics
//!
//! ```text
//! dx = -alpha * x dt + sigma dz
//! ```
//!
//! with reversion speed `alpha > 0`, shock size `sigma > 0` and long-run
//! variance `Sigma = sigma^2 / (2 alpha)`. Sampled on a grid of step `dt`
//! the process is exactly the AR(1) recursion
//!
//! ```text
//! x_{k+1} = beta * x_k + sigma_d * eps_k,   beta = exp(-alpha dt),
//! sigma_d^2 = Sigma * (1 - beta^2),
//! ```
//!
//! so simulation carries no time-step bias: refining `dt` changes the grid,
//! not the law of the sampled points.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Continuous-time parameters: reversion speed `alpha` (per unit time) and
/// diffusion volatility `sigma` (per square-root unit time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    alpha: f64,
    sigma: f64,
}

impl OuParams {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        Ok(Self { alpha, sigma })
    }

    /// Convenience constructor from the long-run variance `Sigma` instead of
    /// the diffusion volatility: `sigma = sqrt(2 alpha Sigma)`.
    pub fn from_stationary_variance(alpha: f64, stationary_variance: f64) -> Result<Self> {
        if !stationary_variance.is_finite() || stationary_variance <= 0.0 {
            return Err(Error::invalid(
                "stationary_variance",
                format!("must be finite and > 0, got {stationary_variance}"),
            ));
        }
        Self::new(alpha, (2.0 * alpha * stationary_variance).sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Long-run variance `Sigma = sigma^2 / (2 alpha)`.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.alpha)
    }

    /// Stationary autocovariance `Sigma * exp(-alpha |tau|)`.
    pub fn autocovariance(&self, tau: f64) -> f64 {
        self.stationary_variance() * (-self.alpha * tau.abs()).exp()
    }

    /// Exact one-step discretization over `dt`.
    pub fn to_ar1(&self, dt: f64) -> Ar1Params {
        assert!(dt > 0.0 && dt.is_finite(), "dt must be finite and positive");
        let beta = (-self.alpha * dt).exp();
        let sigma_d = (self.stationary_variance() * (1.0 - beta * beta)).sqrt();
        Ar1Params { beta, sigma_d }
    }
}

/// One-step parameters of `x_t = beta x_{t-1} + sigma_d eps_t` with
/// `0 < beta < 1` and `sigma_d > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Params {
    beta: f64,
    sigma_d: f64,
}

impl Ar1Params {
    pub fn new(beta: f64, sigma_d: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 || beta >= 1.0 {
            return Err(Error::invalid(
                "beta",
                format!("must lie strictly inside (0, 1), got {beta}"),
            ));
        }
        if !sigma_d.is_finite() || sigma_d <= 0.0 {
            return Err(Error::invalid(
                "sigma_d",
                format!("must be finite and > 0, got {sigma_d}"),
            ));
        }
        Ok(Self { beta, sigma_d })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma_d(&self) -> f64 {
        self.sigma_d
    }

    /// Long-run variance `sigma_d^2 / (1 - beta^2)`.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma_d * self.sigma_d / (1.0 - self.beta * self.beta)
    }

    /// Inverse of [`OuParams::to_ar1`]: `alpha = -ln(beta)/dt`, `sigma` set so
    /// the stationary variances agree.
    pub fn to_ou(&self, dt: f64) -> OuParams {
        assert!(dt > 0.0 && dt.is_finite(), "dt must be finite and positive");
        let alpha = -self.beta.ln() / dt;
        let sigma = (2.0 * alpha * self.stationary_variance()).sqrt();
        OuParams { alpha, sigma }
    }
}

/// Simulation grid: step size, step count and RNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGrid {
    pub dt: f64,
    pub n_steps: u64,
    pub seed: u64,
}

impl PathGrid {
    pub fn new(dt: f64, n_steps: u64, seed: u64) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        Ok(Self { dt, n_steps, seed })
    }

    /// Horizon covered by the grid.
    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Initial condition of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// Start from the given mispricing.
    Fixed(f64),
    /// Draw the start from the stationary law `N(0, Sigma)`, consuming one
    /// draw from the path's random stream. Statistics need no burn-in.
    Stationary,
}

/// A realized mispricing path on its grid; `values` has `n_steps + 1` points.
#[derive(Debug, Clone, PartialEq)]
pub struct MispricingPath {
    grid: PathGrid,
    values: Vec<f64>,
}

impl MispricingPath {
    /// Wrap an externally supplied sequence of grid values; the length must
    /// be `grid.n_steps + 1` and every value finite.
    pub fn from_values(grid: PathGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_steps as usize + 1 {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {} points for {} steps, got {}",
                    grid.n_steps + 1,
                    grid.n_steps,
                    values.len()
                ),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite value {bad}")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PathGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    /// Number of steps (one less than the number of points).
    pub fn n_steps(&self) -> u64 {
        self.grid.n_steps
    }
}

/// The seeded generator for stream `stream` of master seed `seed`. Distinct
/// streams are statistically independent, so parallel realizations are
/// reproducible regardless of scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulate the process from a fixed start on stream 0 of `grid.seed`.
/// Deterministic in `(params, grid, x0)`.
pub fn simulate(params: &OuParams, grid: &PathGrid, x0: f64) -> MispricingPath {
    simulate_with(params, grid, Start::Fixed(x0), 0)
}

/// Simulate with an explicit start condition and stream index.
pub fn simulate_with(
    params: &OuParams,
    grid: &PathGrid,
    start: Start,
    stream: u64,
) -> MispricingPath {
    let ar1 = params.to_ar1(grid.dt);
    simulate_ar1(&ar1, grid, start, stream)
}

/// Simulate the AR(1) recursion directly; `grid.dt` only labels the physical
/// time per step.
pub fn simulate_ar1(
    params: &Ar1Params,
    grid: &PathGrid,
    start: Start,
    stream: u64,
) -> MispricingPath {
    let mut rng = stream_rng(grid.seed, stream);
    let mut x = match start {
        Start::Fixed(x0) => x0,
        Start::Stationary => {
            let z: f64 = StandardNormal.sample(&mut rng);
            params.stationary_variance().sqrt() * z
        }
    };
    let mut values = Vec::with_capacity(grid.n_steps as usize + 1);
    values.push(x);
    for _ in 0..grid.n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        x = params.beta * x + params.sigma_d * z;
        values.push(x);
    }
    MispricingPath { grid: *grid, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{batch_statistic, mean, sample_variance, BATCH_COUNT};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn stationary_variance_examples() {
        let p = OuParams::new(0.5, 0.01).unwrap();
        assert_abs_diff_eq!(p.stationary_variance(), 1.0e-4, epsilon = 1e-19);
        let p = OuParams::new(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(p.stationary_variance(), 1.0);
        let p = OuParams::new(1.0, 2.0f64.sqrt()).unwrap();
        assert_abs_diff_eq!(p.stationary_variance(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn discretization_examples() {
        // alpha = ln 2 and Sigma = 1 give beta = 1/2, sigma_d^2 = 3/4 at dt = 1
        let p = OuParams::from_stationary_variance(std::f64::consts::LN_2, 1.0).unwrap();
        let ar1 = p.to_ar1(1.0);
        assert_abs_diff_eq!(ar1.beta(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ar1.sigma_d() * ar1.sigma_d(), 0.75, epsilon = 1e-15);

        let p = OuParams::new(0.5, 0.01).unwrap();
        let ar1 = p.to_ar1(1.0);
        assert_abs_diff_eq!(ar1.beta(), (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(
            ar1.sigma_d() * ar1.sigma_d(),
            1e-4 * (1.0 - (-1.0f64).exp()),
            max_relative = 1e-14
        );

        // Strong decorrelation: alpha * dt large drives beta to 0 and
        // sigma_d^2 to Sigma.
        let p = OuParams::from_stationary_variance(1.0, 0.123).unwrap();
        let ar1 = p.to_ar1(100.0);
        assert!(ar1.beta() < 1e-40);
        assert_relative_eq!(ar1.sigma_d() * ar1.sigma_d(), 0.123, max_relative = 1e-12);
    }

    #[test]
    fn inverse_mapping_examples() {
        let ar1 = Ar1Params::new(0.5, 0.1).unwrap();
        assert_abs_diff_eq!(ar1.to_ou(1.0).alpha(), std::f64::consts::LN_2, epsilon = 1e-15);
        let ar1 = Ar1Params::new((-1.0f64).exp(), 0.1).unwrap();
        assert_abs_diff_eq!(ar1.to_ou(1.0).alpha(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ar1_domain_errors() {
        assert!(Ar1Params::new(0.0, 0.1).is_err());
        assert!(Ar1Params::new(1.0, 0.1).is_err());
        assert!(Ar1Params::new(-1.0, 0.1).is_err());
        assert!(Ar1Params::new(0.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            alpha in 1e-3..10.0f64,
            sigma in 1e-4..10.0f64,
            dt in 1e-3..10.0f64,
        ) {
            let p = OuParams::new(alpha, sigma).unwrap();
            let back = p.to_ar1(dt).to_ou(dt);
            prop_assert!((back.alpha() - alpha).abs() <= 1e-12 * alpha);
            prop_assert!((back.sigma() - sigma).abs() <= 1e-12 * sigma);
        }
    }

    #[test]
    fn same_seed_gives_identical_paths() {
        let p = OuParams::new(0.7, 0.3).unwrap();
        let grid = PathGrid::new(0.1, 1000, 42).unwrap();
        let a = simulate(&p, &grid, 0.2);
        let b = simulate(&p, &grid, 0.2);
        assert_eq!(a, b);
        let c = simulate_with(&p, &grid, Start::Fixed(0.2), 1);
        assert_ne!(a, c);
    }

    #[test]
    fn strong_reversion_pulls_path_to_zero() {
        let p = OuParams::new(50.0, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 200, 7).unwrap();
        let path = simulate(&p, &grid, 1.0);
        let tail = &path.values()[100..];
        let sigma_stat = p.stationary_variance().sqrt();
        assert!(tail.iter().all(|x| x.abs() < 10.0 * sigma_stat));
    }

    #[test]
    fn sampled_variance_matches_stationary_value() {
        // 1e5 steps at the daily scale of the empirical section
        let p = OuParams::new(0.5, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 100_000, 11).unwrap();
        let path = simulate(&p, &grid, 0.0);
        let est = batch_statistic(path.values(), BATCH_COUNT, |b| {
            sample_variance(b).unwrap()
        })
        .unwrap();
        let z = est.z_against(p.stationary_variance());
        assert!(z.abs() <= 4.0, "z = {z}");
    }

    #[test]
    fn sampled_lag_one_autocorrelation_matches_beta() {
        let p = OuParams::new(0.5, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 100_000, 13).unwrap();
        let path = simulate_with(&p, &grid, Start::Stationary, 0);
        let xs = path.values();
        // per-batch lag-1 autocorrelation
        let est = batch_statistic(xs, BATCH_COUNT, |b| {
            let m = mean(b);
            let mut num = 0.0;
            let mut den = 0.0;
            for w in b.windows(2) {
                num += (w[0] - m) * (w[1] - m);
            }
            for v in b {
                den += (v - m) * (v - m);
            }
            num / den
        })
        .unwrap();
        let z = est.z_against(p.to_ar1(1.0).beta());
        assert!(z.abs() <= 4.0, "z = {z}");
    }

    #[test]
    fn sampled_autocovariance_matches_closed_form() {
        let p = OuParams::new(1.0, 1.0).unwrap();
        let grid = PathGrid::new(0.25, 100_000, 17).unwrap();
        let path = simulate_with(&p, &grid, Start::Stationary, 0);
        let xs = path.values();
        let lag = 4; // tau = 1.0
        let est = batch_statistic(xs, BATCH_COUNT, |b| {
            let m = mean(b);
            b.windows(lag + 1)
                .map(|w| (w[0] - m) * (w[lag] - m))
                .sum::<f64>()
                / (b.len() - lag) as f64
        })
        .unwrap();
        let z = est.z_against(p.autocovariance(1.0));
        assert!(z.abs() <= 4.0, "z = {z}");
        // symmetry in tau
        assert_eq!(p.autocovariance(-1.0), p.autocovariance(1.0));
        assert_abs_diff_eq!(p.autocovariance(0.0), p.stationary_variance());
        // alpha = 1, Sigma = 1, tau = ln 2 halves the covariance
        assert_abs_diff_eq!(
            OuParams::from_stationary_variance(1.0, 1.0)
                .unwrap()
                .autocovariance(std::f64::consts::LN_2),
            0.5,
            epsilon = 1e-15
        );
    }
}
