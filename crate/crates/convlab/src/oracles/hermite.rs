//! Normalized Hermite polynomials and Gaussian covariance identities.
//!
//! With `H̃_k = He_k / sqrt(k!)` (probabilists' polynomials scaled to unit
//! variance under `N(0,1)`) the family is orthonormal and diagonalizes the
//! covariance of transforms of a correlated standard Gaussian pair:
//!
//! ```text
//! E[H̃_i(x) H̃_j(y)] = beta^i delta_ij,   Cov(x, y) = beta.
//! ```
//!
//! For `f = Σ a_k H̃_k` (k >= 1) this gives `Cov(f(x), f(y)) = Σ a_k^2 beta^k`
//! and `Var(f(x)) = Σ a_k^2`, so with unit variance the covariance lies in
//! `[beta^N, beta]`, the extremes attained by `f = H̃_N` and `f = H̃_1 = x`.
//! Everything here is double-checked against brute-force quadrature.

use crate::error::{Error, Result};
use crate::quad;

/// `H̃_k(x)`, the degree-`k` Hermite polynomial normalized to unit variance
/// under the standard Gaussian. Three-term recurrence in normalized form:
/// `H̃_{k+1} = (x H̃_k - sqrt(k) H̃_{k-1}) / sqrt(k+1)`.
pub fn hermite_normalized(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0; // H̃_0
            let mut cur = x; // H̃_1
            for m in 1..k {
                let next = (x * cur - (m as f64).sqrt() * prev) / ((m + 1) as f64).sqrt();
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// A polynomial rule `f = Σ_{k=1}^{N} a_k H̃_k` in the normalized Hermite
/// basis (no constant term, so `E f(Z) = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPolicy {
    coeffs: Vec<f64>,
}

impl PolynomialPolicy {
    /// `coeffs[k-1]` multiplies `H̃_k`; the degree is `coeffs.len()`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "need at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coeffs", "coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    /// Rescale so `Σ a_k^2 = 1` (unit variance under the standard Gaussian).
    pub fn normalized(coeffs: Vec<f64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("coeffs", "cannot normalize a zero vector"));
        }
        Self::new(coeffs.into_iter().map(|c| c / norm).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `Var(f(Z)) = Σ a_k^2` under the standard Gaussian.
    pub fn variance(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * hermite_normalized(i + 1, x))
            .sum()
    }
}

/// A pair of unit-variance jointly Gaussian variables with correlation
/// `beta` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    beta: f64,
}

impl GaussianPair {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid("beta", format!("must lie in [0, 1), got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Closed-form covariance `Cov(f(x), f(y)) = Σ a_k^2 beta^k`.
pub fn polynomial_cov(policy: &PolynomialPolicy, pair: &GaussianPair) -> f64 {
    policy
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a * a * pair.beta.powi(i as i32 + 1))
        .sum()
}

const BRUTEFORCE_NODES: usize = 64;

/// The same covariance by 2-D tensor-product Gauss–Hermite quadrature over
/// the correlated pair, written as `y = beta x + sqrt(1 - beta^2) z` with
/// independent standard normals. Independent of the closed form above.
pub fn cov_bruteforce(policy: &PolynomialPolicy, pair: &GaussianPair) -> Result<f64> {
    cov_bruteforce_fn(|x| policy.eval(x), policy.degree(), pair)
}

/// Brute-force covariance for an arbitrary transform `f` of the pair.
/// `poly_degree` is the polynomial degree the rule must resolve exactly
/// (pass the degree for polynomials, 0 for generic smooth functions).
pub fn cov_bruteforce_fn(
    f: impl Fn(f64) -> f64,
    poly_degree: usize,
    pair: &GaussianPair,
) -> Result<f64> {
    if poly_degree + 1 > BRUTEFORCE_NODES {
        return Err(Error::invalid(
            "degree",
            format!(
                "a {BRUTEFORCE_NODES}-node rule resolves polynomial degree {} at most, got {poly_degree}",
                BRUTEFORCE_NODES - 1
            ),
        ));
    }
    let rule = quad::gauss_hermite_normal(BRUTEFORCE_NODES);
    let beta = pair.beta;
    let ortho = (1.0 - beta * beta).sqrt();
    let mut e_xy = 0.0;
    let mut e_x = 0.0;
    for &(x, wx) in &rule {
        let fx = f(x);
        e_x += wx * fx;
        let mut inner = 0.0;
        for &(z, wz) in &rule {
            inner += wz * f(beta * x + ortho * z);
        }
        e_xy += wx * fx * inner;
    }
    // E f(y) = E f(x) by symmetry of the pair
    Ok(e_xy - e_x * e_x)
}

/// `Var(g(X))` for `X ~ N(0, sigma_sq)` by Gauss–Hermite quadrature.
pub fn variance_under_normal(g: impl Fn(f64) -> f64, sigma_sq: f64) -> f64 {
    let rule = quad::gauss_hermite_normal(BRUTEFORCE_NODES);
    let scale = sigma_sq.sqrt();
    let mean = quad::gh_expect(&rule, |z| g(scale * z));
    quad::gh_expect(&rule, |z| {
        let d = g(scale * z) - mean;
        d * d
    })
}

/// Coefficients `b_k = E[g(sqrt(Sigma) Z) H̃_k(Z)]`, `k = 1..=max_degree`, of
/// the Hermite expansion of `g` under `N(0, Sigma)`.
pub fn hermite_coefficients(
    g: impl Fn(f64) -> f64,
    sigma_sq: f64,
    max_degree: usize,
) -> Vec<f64> {
    let rule = quad::gauss_hermite_normal(BRUTEFORCE_NODES);
    let scale = sigma_sq.sqrt();
    (1..=max_degree)
        .map(|k| quad::gh_expect(&rule, |z| g(scale * z) * hermite_normalized(k, z)))
        .collect()
}

/// Long-run variance growth rate of `∫ g(x_t) dt` for the stationary process,
/// from the Hermite expansion of `g`:
///
/// ```text
/// lim Var(∫_0^T g(x_t) dt) / T = 2 Σ_k b_k^2 / (k alpha),
/// ```
///
/// since lag-`tau` covariances contract each degree by `exp(-k alpha tau)`.
/// Used as the quadrature-side oracle for the smooth-rule variance rate `r`
/// with `g = f'`.
pub fn dpolicy_variance_rate(
    f_prime: impl Fn(f64) -> f64,
    params: &crate::process::OuParams,
    max_degree: usize,
) -> f64 {
    let coeffs = hermite_coefficients(f_prime, params.stationary_variance(), max_degree);
    2.0 / params.alpha()
        * coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| b * b / (i + 1) as f64)
            .sum::<f64>()
}
