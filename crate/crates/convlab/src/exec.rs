//! Execution of independently seeded work items.
//!
//! Monte-Carlo drivers in this crate fan out over stream indices and collect
//! one value per stream. Results are collected in index order, so the output
//! is identical whether the items run on one thread or many. With the
//! `parallel` feature enabled the fan-out uses rayon; without it the same
//! code runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to every stream index in `0..n` and collect the results in
/// index order.
pub fn map_streams<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_streams`], always available. Benchmarks use it
/// as the single-thread baseline.
pub fn map_streams_seq<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..n).map(f).collect()
}
