//! Convergence-trading laboratory for a mean-reverting mispricing.
//!
//! The model: a log mispricing `x_t = ln(p_actual / p_correct)` follows the
//! Ornstein–Uhlenbeck dynamics `dx = -alpha x dt + sigma dz`, and a trader's
//! log wealth responds to mispricing moves through a leverage rule `f(x)`,
//! `du = f(x) dx`. The crate provides:
//!
//! - [`process`] — exact-discretization simulation of the process and its
//!   AR(1) counterpart, with reproducible per-stream seeding;
//! - [`policies`] — linear, smooth and threshold leverage rules, wealth-path
//!   accounting with transaction costs, and the pathwise representation
//!   check for smooth rules;
//! - [`analytics`] — closed-form growth/variance rates, optimal leverage and
//!   reduced utility of threshold rules, linear-rule rates;
//! - [`oracles`] — independent quadrature and Monte-Carlo cross-checks
//!   (Hermite covariance identities, occupation-time moments, the
//!   variance-growth dichotomy);
//! - [`backtest`] — the Monte-Carlo strategy-grid experiment with common
//!   random numbers and contour-table output;
//! - [`estimation`] — price/NAV ingestion, AR(1) least squares and
//!   Durbin–Watson diagnostics.
//!
//! Data-parallel loops fan out over independently seeded streams through
//! [`exec::map_streams`]; with the `parallel` feature (default) they run on
//! rayon, without it sequentially, with bit-identical results either way.

pub mod analytics;
pub mod backtest;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod oracles;
pub mod policies;
pub mod process;
pub mod quad;
pub mod stats;

pub use error::{Error, Result};
