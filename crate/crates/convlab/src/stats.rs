//! Small statistical helpers shared by the Monte-Carlo modules.
//!
//! Error bars for path functionals use batch means: the sample is split into
//! `BATCH_COUNT` contiguous batches and the spread of the per-batch statistic
//! estimates the standard error of the whole-sample statistic. This stays
//! honest under the serial dependence that iid formulas ignore.

/// Number of batches used for batch-means error bars.
pub const BATCH_COUNT: usize = 20;

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Signed distance from `target` in units of the standard error.
    pub fn z_against(&self, target: f64) -> f64 {
        (self.value - target) / self.std_error
    }

    /// True when the estimate lies within `k` standard errors of `target`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n-1 denominator) sample variance; `None` for fewer than two points.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    Some(ss / (xs.len() - 1) as f64)
}

pub fn sample_std(xs: &[f64]) -> Option<f64> {
    sample_variance(xs).map(f64::sqrt)
}

/// Batch-means estimate of the mean of a serially dependent sample.
pub fn batch_means(xs: &[f64], n_batches: usize) -> Option<McEstimate> {
    batch_statistic(xs, n_batches, mean)
}

/// Batch-means machinery for an arbitrary per-batch statistic: the value is
/// the statistic of the whole (truncated) sample, the error bar comes from
/// the spread of the per-batch values.
pub fn batch_statistic(
    xs: &[f64],
    n_batches: usize,
    stat: impl Fn(&[f64]) -> f64,
) -> Option<McEstimate> {
    let batch_len = xs.len() / n_batches;
    if batch_len == 0 {
        return None;
    }
    let used = &xs[..batch_len * n_batches];
    let batch_values: Vec<f64> = used.chunks_exact(batch_len).map(|b| stat(b)).collect();
    let se = (sample_variance(&batch_values)? / n_batches as f64).sqrt();
    Some(McEstimate {
        value: stat(used),
        std_error: se,
    })
}

/// Ordinary least squares fit y = a + b x; returns (slope, intercept).
pub fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    debug_assert!(sxx > 0.0 && n >= 2.0);
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
