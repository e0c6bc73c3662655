//! Numerical integration: adaptive Simpson quadrature on finite intervals
//! and Gauss–Hermite rules for expectations under the standard normal.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Value and error estimate returned by the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

const MAX_DEPTH: u32 = 52;
const MAX_EVALS: u64 = 20_000_000;
// Panels stop refining once their discrepancy falls below this fraction of
// the local magnitude; f64 cannot do better, and without the floor an
// integrand of huge magnitude would recurse to the full depth everywhere.
const REL_FLOOR: f64 = 1e-13;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `abs_tol` (with a relative floor of about 1e-13 of the result, whichever
/// is larger). Fails with the achieved error estimate when the recursion
/// bottoms out or the evaluation budget runs out before the tolerance is
/// met.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature> {
    if !(abs_tol > 0.0) {
        return Err(Error::invalid("abs_tol", "must be positive"));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let mut state = State {
        f: &f,
        err_acc: 0.0,
        evals: 3,
    };
    let value = recurse(&mut state, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH);
    // per-panel floors add up across an accepted partition; 4x covers the
    // bookkeeping slack for single-signed integrands
    let allowed = abs_tol + 4.0 * REL_FLOOR * value.abs();
    if !(state.err_acc <= allowed) {
        return Err(Error::Quadrature {
            achieved: state.err_acc,
            required: allowed,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: state.err_acc,
    })
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

struct State<'a, F> {
    f: &'a F,
    err_acc: f64,
    evals: u64,
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    state: &mut State<'_, F>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = (state.f)(lm);
    let frm = (state.f)(rm);
    state.evals += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    let delta = refined - whole;
    // 15 = 2^4 - 1 from the Richardson step of Simpson's rule.
    let accept = delta.abs() <= 15.0 * (tol + REL_FLOOR * refined.abs());
    if accept || depth == 0 || state.evals >= MAX_EVALS {
        let correction = delta / 15.0;
        state.err_acc += if correction.is_finite() {
            correction.abs()
        } else {
            f64::INFINITY
        };
        return refined + correction;
    }
    recurse(state, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(state, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Nodes and weights `(x_i, w_i)` such that `Σ w_i g(x_i) ≈ E[g(Z)]` for
/// `Z ~ N(0, 1)`. Golub–Welsch on the Jacobi matrix of the probabilists'
/// Hermite recurrence: tridiagonal, zero diagonal, off-diagonal `√k`.
pub fn gauss_hermite_normal(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let v = (k as f64).sqrt();
        jacobi[(k - 1, k)] = v;
        jacobi[(k, k - 1)] = v;
    }
    let eigen = jacobi.symmetric_eigen();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eigen.eigenvalues[i];
            let first = eigen.eigenvectors[(0, i)];
            (node, first * first)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Expectation of `g(Z)`, `Z ~ N(0, 1)`, under a precomputed rule.
pub fn gh_expect(rule: &[(f64, f64)], g: impl Fn(f64) -> f64) -> f64 {
    rule.iter().map(|&(x, w)| w * g(x)).sum()
}
