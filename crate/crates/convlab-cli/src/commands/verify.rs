use crate::cli::VerifyArgs;
use crate::manifest::{sibling_manifest, RunManifest};
use crate::output::{with_thread_cap, write_atomic, CliError, CliResult};
use convlab::analytics::{phi, psi};
use convlab::oracles::{
    cov_bruteforce, delta_integral_variance_mc, delta_mean_mc, delta_second_moment,
    delta_second_moment_mc, dpolicy_variance_rate, hermite_normalized, polynomial_cov, theta,
    theta_integral, variance_growth_rate_mc, GaussianPair, IntegralVarianceMcConfig,
    OccupationMcConfig, PolynomialPolicy, VarianceGrowthConfig,
};
use convlab::policies::{DifferentiablePolicy, Policy};
use convlab::process::{stream_rng, OuParams};
use convlab::quad::{gauss_hermite_normal, gh_expect};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use std::fmt::Write as _;

struct Check {
    name: &'static str,
    /// Worst observed deviation, in the units of `required`.
    achieved: f64,
    required: f64,
    detail: String,
}

impl Check {
    fn passed(&self) -> bool {
        self.achieved <= self.required
    }
}

pub fn run(args: &VerifyArgs) -> CliResult<()> {
    let factor = args.tol_factor;
    if !(factor > 0.0) {
        return Err(CliError::Core(convlab::Error::InvalidParameter {
            name: "tol-factor",
            reason: "must be positive".into(),
        }));
    }
    let checks = with_thread_cap(args.common.threads, || {
        run_checks(args.common.seed, factor, args.quick)
    })?;

    let mut report = String::new();
    let _ = writeln!(
        report,
        "{:<28} {:>9} {:>12} {:>12}  detail",
        "check", "status", "achieved", "required"
    );
    let mut failed = 0usize;
    for check in &checks {
        if !check.passed() {
            failed += 1;
        }
        let _ = writeln!(
            report,
            "{:<28} {:>9} {:>12} {:>12}  {}",
            check.name,
            if check.passed() { "PASS" } else { "FAIL" },
            format!("{:.3e}", check.achieved),
            format!("{:.3e}", check.required),
            check.detail
        );
    }
    let _ = writeln!(
        report,
        "RESULT: {} ({}/{} checks passed)",
        if failed == 0 { "PASS" } else { "FAIL" },
        checks.len() - failed,
        checks.len()
    );
    print!("{report}");

    if let Some(out) = &args.out {
        write_atomic(out, &report)?;
        RunManifest::new("verify-appendix", args, vec![out.clone()])?
            .write(&sibling_manifest(out))?;
    }

    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn run_checks(seed: u64, factor: f64, quick: bool) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    let rule = gauss_hermite_normal(64);

    // orthonormality of the normalized Hermite family
    let mut worst: f64 = 0.0;
    for i in 0..=8usize {
        for j in 0..=8usize {
            let inner = gh_expect(&rule, |x| hermite_normalized(i, x) * hermite_normalized(j, x));
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner - want).abs());
        }
    }
    checks.push(Check {
        name: "hermite-orthonormality",
        achieved: worst,
        required: 1e-10,
        detail: "E[Hi Hj] vs identity, degrees <= 8".into(),
    });

    // covariance identity E[Hi(x) Hj(y)] = beta^i delta_ij
    let mut worst: f64 = 0.0;
    for &beta in &[0.1, 0.5, 0.9] {
        let ortho = (1.0f64 - beta * beta).sqrt();
        for i in 1..=6usize {
            for j in 1..=6usize {
                let mut acc = 0.0;
                for &(x, wx) in &rule {
                    let inner = gh_expect(&rule, |z| hermite_normalized(j, beta * x + ortho * z));
                    acc += wx * hermite_normalized(i, x) * inner;
                }
                let want = if i == j { beta.powi(i as i32) } else { 0.0 };
                worst = worst.max((acc - want).abs());
            }
        }
    }
    checks.push(Check {
        name: "hermite-covariance",
        achieved: worst,
        required: 1e-8,
        detail: "E[Hi(x) Hj(y)] vs beta^i delta_ij, degrees <= 6".into(),
    });

    // unit-variance polynomial covariance bounds, extremes exact
    let pair = GaussianPair::new(0.3)?;
    let mut rng = stream_rng(seed, 1000);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6usize);
        let coeffs: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let policy = match PolynomialPolicy::normalized(coeffs) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let cov = polynomial_cov(&policy, &pair);
        let lo = pair.beta().powi(policy.degree() as i32);
        worst = worst.max(lo - cov).max(cov - pair.beta());
    }
    let e1 = PolynomialPolicy::new(vec![1.0])?;
    let e5 = PolynomialPolicy::new(vec![0.0, 0.0, 0.0, 0.0, 1.0])?;
    let extremes_exact = polynomial_cov(&e1, &pair) == pair.beta()
        && polynomial_cov(&e5, &pair) == pair.beta().powi(5);
    checks.push(Check {
        name: "covariance-bounds",
        achieved: if extremes_exact { worst.max(0.0) } else { f64::INFINITY },
        required: 1e-12,
        detail: "100 seeded unit polynomials in [beta^N, beta]; extremes exact".into(),
    });

    // positivity of the brute-force covariance for smooth rules
    let mut min_cov = f64::INFINITY;
    for &beta in &[0.1, 0.4, 0.8] {
        let pair = GaussianPair::new(beta)?;
        min_cov = min_cov.min(convlab::oracles::hermite::cov_bruteforce_fn(
            |x| x.tanh(),
            0,
            &pair,
        )?);
        min_cov = min_cov.min(convlab::oracles::hermite::cov_bruteforce_fn(
            |x| x.clamp(-1.0, 1.0),
            0,
            &pair,
        )?);
        let poly = PolynomialPolicy::normalized(vec![0.6, -0.3, 0.74])?;
        min_cov = min_cov.min(cov_bruteforce(&poly, &pair)?);
    }
    checks.push(Check {
        name: "covariance-positivity",
        achieved: (-min_cov).max(0.0),
        required: 1e-12,
        detail: "brute-force Cov(f(x), f(y)) >= 0 for smooth rules".into(),
    });

    // occupation mean against the stationary density
    let p = OuParams::from_stationary_variance(1.0, 1.0)?;
    let n_steps = if quick { 200_000 } else { 1_000_000 };
    let mut worst_z: f64 = 0.0;
    for level in [0.0, 1.0] {
        let cfg = OccupationMcConfig {
            band: 0.01,
            dt: 0.05,
            n_steps,
            seed,
        };
        let est = delta_mean_mc(level, &p, &cfg)?;
        worst_z = worst_z.max(est.z_against(phi(level, 1.0)?).abs());
    }
    checks.push(Check {
        name: "occupation-mean-mc",
        achieved: worst_z,
        required: 3.0 * factor,
        detail: "band occupancy vs phi(S), z-units".into(),
    });

    // two-time occupation moment at lag 1
    let cfg = OccupationMcConfig {
        band: 0.05,
        dt: 0.02,
        n_steps: if quick { 400_000 } else { 2_000_000 },
        seed: seed + 1,
    };
    let est = delta_second_moment_mc(0.0, 1.0, &p, &cfg)?;
    let want = delta_second_moment(0.0, 1.0, &p)?;
    checks.push(Check {
        name: "occupation-pair-mc",
        achieved: est.z_against(want).abs(),
        required: 3.0 * factor,
        detail: "band pair product vs closed form at lag 1, z-units".into(),
    });

    // exponential decay of the lag covariance
    let phi_half = phi(0.5, 1.0)?;
    let late = theta(20.0, 0.5, &p)?.abs() / (phi_half * phi_half);
    checks.push(Check {
        name: "theta-decay",
        achieved: late,
        required: 1e-6,
        detail: "|theta(alpha tau = 20)| relative to phi^2".into(),
    });

    // lag-integral identity: 2 ∫ theta dtau = sqrt(2 pi Sigma) phi^2 psi
    let mut worst_rel: f64 = 0.0;
    for level in [0.0, 1.0, 2.0] {
        let lhs = 2.0 * theta_integral(level, &p)?;
        let density = phi(level, 1.0)?;
        let rhs = (2.0 * PI).sqrt() * density * density * psi(level, 1.0, 1.0)?;
        worst_rel = worst_rel.max((lhs - rhs).abs() / rhs);
    }
    checks.push(Check {
        name: "occupation-chain",
        achieved: worst_rel,
        required: 1e-6,
        detail: "2 int theta dtau vs sqrt(2 pi Sigma) phi^2 psi".into(),
    });

    // across-realization variance of the occupation integral
    let cfg = IntegralVarianceMcConfig {
        band: 0.05,
        dt: if quick { 1e-3 } else { 3e-4 },
        horizon: 100.0,
        n_realizations: if quick { 200 } else { 600 },
        seed: seed + 2,
    };
    let mut worst_rel: f64 = 0.0;
    for level in [0.0, 1.0] {
        let est = delta_integral_variance_mc(level, &p, &cfg)?;
        let want = 2.0 * theta_integral(level, &p)?;
        worst_rel = worst_rel.max((est.value - want).abs() / want);
    }
    checks.push(Check {
        name: "occupation-variance-mc",
        achieved: worst_rel,
        required: 0.10 * factor * if quick { 2.0 } else { 1.0 },
        detail: "Var(int delta)/T vs 2 int theta dtau, relative".into(),
    });

    // variance-growth dichotomy: flat for linear, Hermite rate for tanh
    let vg = VarianceGrowthConfig {
        dt: 2e-3,
        horizon: if quick { 100.0 } else { 200.0 },
        n_realizations: if quick { 100 } else { 150 },
        n_checkpoints: 60,
        seed: seed + 3,
    };
    let linear = variance_growth_rate_mc(&Policy::linear(1.0)?, &p, &vg)?;
    checks.push(Check {
        name: "variance-flat-linear",
        achieved: linear.slope_z.abs(),
        required: 3.0 * factor,
        detail: "Var(u_t) slope for f = -kx, z-units".into(),
    });
    let tanh_policy = Policy::Differentiable(DifferentiablePolicy::new(
        |x: f64| -x.tanh(),
        |x: f64| -1.0 / x.cosh().powi(2),
        1.0,
    ));
    let tanh_est = variance_growth_rate_mc(&tanh_policy, &p, &vg)?;
    let tanh_rate = dpolicy_variance_rate(|x: f64| -1.0 / x.cosh().powi(2), &p, 24);
    checks.push(Check {
        name: "variance-rate-tanh",
        achieved: ((tanh_est.rate - tanh_rate) / tanh_est.rate_std_error).abs(),
        required: 3.0 * factor,
        detail: format!(
            "r-hat {:.4e} vs Hermite-sum {:.4e}, z-units",
            tanh_est.rate, tanh_rate
        ),
    });

    Ok(checks)
}
