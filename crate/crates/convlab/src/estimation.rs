//! The empirical pipeline: price/NAV ingestion, mispricing extraction and
//! AR(1) estimation with diagnostics.
//!
//! Input files are CSV with header `date,price,nav`, ISO-8601 dates in
//! strictly ascending order, and positive decimal prices. The mispricing is
//! `x_t = ln(price_t / nav_t)`; the fitted model is the no-intercept
//! regression `x_t = beta x_{t-1} + sigma eps_t` (an intercept variant
//! exists for diagnostics). Calendar gaps are tolerated: the regression
//! pairs consecutive observations regardless of the spacing of dates.

use crate::error::{Error, Result};
use crate::process::Ar1Params;
use chrono::NaiveDate;
use std::io::Read;
use std::path::Path;

/// Aligned date/price/NAV columns, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    price: Vec<f64>,
    nav: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, price: Vec<f64>, nav: Vec<f64>) -> Result<Self> {
        if dates.len() != price.len() || dates.len() != nav.len() {
            return Err(Error::invalid("series", "columns must have equal length"));
        }
        if dates.is_empty() {
            return Err(Error::invalid("series", "must not be empty"));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid(
                    "dates",
                    format!("must be strictly ascending, {} follows {}", w[1], w[0]),
                ));
            }
        }
        if let Some(bad) = price.iter().chain(&nav).find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::invalid("price/nav", format!("must be positive, got {bad}")));
        }
        Ok(Self { dates, price, nav })
    }

    /// Parse the `date,price,nav` CSV format; validation failures carry the
    /// 1-based line number of the offending row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        {
            let headers = csv_reader.headers().map_err(csv_to_error)?;
            let expect = ["date", "price", "nav"];
            let got: Vec<&str> = headers.iter().map(str::trim).collect();
            if got != expect {
                return Err(Error::Ingestion {
                    line: 1,
                    reason: format!("expected header date,price,nav, got {}", got.join(",")),
                });
            }
        }
        let mut dates = Vec::new();
        let mut price = Vec::new();
        let mut nav = Vec::new();
        for record in csv_reader.records() {
            let record = record.map_err(csv_to_error)?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| -> Result<&str> {
                record.get(i).map(str::trim).ok_or(Error::Ingestion {
                    line,
                    reason: format!("missing column {}", i + 1),
                })
            };
            let date = NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d").map_err(|e| {
                Error::Ingestion {
                    line,
                    reason: format!("bad date {:?}: {e}", field(0).unwrap_or("")),
                }
            })?;
            let parse_pos = |name: &str, raw: &str| -> Result<f64> {
                let v: f64 = raw.parse().map_err(|_| Error::Ingestion {
                    line,
                    reason: format!("bad {name} {raw:?}"),
                })?;
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::Ingestion {
                        line,
                        reason: format!("{name} must be positive, got {v}"),
                    });
                }
                Ok(v)
            };
            if let Some(prev) = dates.last() {
                if date <= *prev {
                    return Err(Error::Ingestion {
                        line,
                        reason: format!("dates must be strictly ascending, {date} follows {prev}"),
                    });
                }
            }
            dates.push(date);
            price.push(parse_pos("price", field(1)?)?);
            nav.push(parse_pos("nav", field(2)?)?);
        }
        Self::new(dates, price, nav)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn price(&self) -> &[f64] {
        &self.price
    }

    pub fn nav(&self) -> &[f64] {
        &self.nav
    }
}

fn csv_to_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, csv::Position::line);
    Error::Ingestion {
        line,
        reason: e.to_string(),
    }
}

/// The log price/NAV ratio aligned with its dates.
#[derive(Debug, Clone, PartialEq)]
pub struct MispricingSeries {
    dates: Vec<NaiveDate>,
    x: Vec<f64>,
}

impl MispricingSeries {
    /// Wrap a bare series (dates synthesized as consecutive days) — handy for
    /// simulated data.
    pub fn from_values(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("x", "must not be empty"));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("x", format!("non-finite value {bad}")));
        }
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..x.len() as i64)
            .map(|i| start + chrono::Duration::days(i))
            .collect();
        Ok(Self { dates, x })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// `x_t = ln(price_t / nav_t)`, exact elementwise.
pub fn mispricing(series: &PriceSeries) -> MispricingSeries {
    MispricingSeries {
        dates: series.dates.clone(),
        x: series
            .price
            .iter()
            .zip(&series.nav)
            .map(|(p, n)| (p / n).ln())
            .collect(),
    }
}

/// No-intercept AR(1) least-squares fit with residual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Fit {
    pub beta_hat: f64,
    /// Residual standard deviation (n-1 denominator over the regression pairs).
    pub sigma_hat: f64,
    pub beta_stderr: f64,
    pub durbin_watson: f64,
    /// Number of regression pairs.
    pub n_obs: usize,
    /// Fitted intercept; zero in the default no-intercept mode.
    pub intercept: f64,
}

impl Ar1Fit {
    /// Convert to process parameters at step `dt`; refuses estimates outside
    /// the stationary domain.
    pub fn to_params(&self) -> Result<Ar1Params> {
        Ar1Params::new(self.beta_hat, self.sigma_hat)
    }
}

/// Fit `x_t = beta x_{t-1} + sigma eps_t` by least squares:
/// `beta = Σ x_t x_{t-1} / Σ x_{t-1}^2`.
pub fn ar1_ols(series: &MispricingSeries) -> Result<Ar1Fit> {
    fit_ar1(series, false)
}

/// Diagnostic variant with a fitted intercept.
pub fn ar1_ols_with_intercept(series: &MispricingSeries) -> Result<Ar1Fit> {
    fit_ar1(series, true)
}

fn fit_ar1(series: &MispricingSeries, with_intercept: bool) -> Result<Ar1Fit> {
    let x = series.values();
    if x.len() < 3 {
        return Err(Error::DegenerateSeries(format!(
            "need at least 3 observations, got {}",
            x.len()
        )));
    }
    let n = x.len() - 1; // regression pairs
    let lagged = &x[..n];
    let current = &x[1..];
    let (beta_hat, intercept) = if with_intercept {
        let (slope, intercept) = crate::stats::ols_slope(lagged, current);
        (slope, intercept)
    } else {
        let sxx: f64 = lagged.iter().map(|v| v * v).sum();
        if sxx == 0.0 {
            return Err(Error::DegenerateSeries(
                "lagged values are identically zero".into(),
            ));
        }
        let sxy: f64 = lagged.iter().zip(current).map(|(a, b)| a * b).sum();
        (sxy / sxx, 0.0)
    };
    let residuals: Vec<f64> = lagged
        .iter()
        .zip(current)
        .map(|(prev, cur)| cur - intercept - beta_hat * prev)
        .collect();
    let ss_res: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma_hat = (ss_res / (n as f64 - 1.0)).sqrt();
    let sxx: f64 = lagged.iter().map(|v| v * v).sum();
    let beta_stderr = sigma_hat / sxx.sqrt();
    let durbin_watson = durbin_watson(&residuals).unwrap_or(f64::NAN);
    Ok(Ar1Fit {
        beta_hat,
        sigma_hat,
        beta_stderr,
        durbin_watson,
        n_obs: n,
        intercept,
    })
}

/// Durbin–Watson statistic `Σ (e_t - e_{t-1})^2 / Σ e_t^2`, in `[0, 4]`;
/// near 2 for serially uncorrelated residuals.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::DegenerateSeries(
            "Durbin-Watson needs at least 2 residuals".into(),
        ));
    }
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateSeries(
            "Durbin-Watson undefined for all-zero residuals".into(),
        ));
    }
    let num: f64 = residuals
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    Ok(num / denom)
}

/// Location and dispersion summary of a mispricing series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); zero for a single point.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

pub fn summary_stats(series: &MispricingSeries) -> SummaryStats {
    let x = series.values();
    let mean = crate::stats::mean(x);
    let std = crate::stats::sample_std(x).unwrap_or(0.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in x {
        min = min.min(v);
        max = max.max(v);
    }
    SummaryStats {
        mean,
        std,
        min,
        max,
        n: x.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{simulate_ar1, PathGrid, Start};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn series_from_prices(price: Vec<f64>, nav: Vec<f64>) -> PriceSeries {
        let start = NaiveDate::from_ymd_opt(2020, 3, 2).unwrap();
        let dates = (0..price.len() as i64)
            .map(|i| start + chrono::Duration::days(i))
            .collect();
        PriceSeries::new(dates, price, nav).unwrap()
    }

    #[test]
    fn mispricing_examples() {
        let s = series_from_prices(vec![10.0, 10.0], vec![10.0, 10.0]);
        assert!(mispricing(&s).values().iter().all(|&x| x == 0.0));

        let e = std::f64::consts::E;
        let s = series_from_prices(vec![2.0 * e], vec![2.0]);
        assert_abs_diff_eq!(mispricing(&s).values()[0], 1.0, epsilon = 1e-15);

        let s = series_from_prices(vec![1.0025], vec![1.0]);
        assert_abs_diff_eq!(mispricing(&s).values()[0], 0.0024969, epsilon = 1e-7);
    }

    proptest! {
        #[test]
        fn mispricing_round_trips_exactly(
            nav in 0.5f64..500.0,
            ratio in 0.9f64..1.1,
        ) {
            let s = series_from_prices(vec![nav * ratio], vec![nav]);
            let x = mispricing(&s).values()[0];
            let back = x.exp() * nav;
            prop_assert!((back - nav * ratio).abs() <= 1e-12 * nav);
        }
    }

    #[test]
    fn geometric_series_fits_exactly() {
        let x: Vec<f64> = (0..=10).map(|t| 0.5f64.powi(t)).collect();
        let fit = ar1_ols(&MispricingSeries::from_values(x).unwrap()).unwrap();
        assert_relative_eq!(fit.beta_hat, 0.5, max_relative = 1e-12);
        assert_abs_diff_eq!(fit.sigma_hat, 0.0, epsilon = 1e-12);
        assert!(fit.to_params().is_err()); // sigma_hat = 0 is outside the domain
    }

    #[test]
    fn alternating_series_reports_out_of_domain_beta() {
        let x: Vec<f64> = (0..20).map(|t| if t % 2 == 0 { 0.3 } else { -0.3 }).collect();
        let fit = ar1_ols(&MispricingSeries::from_values(x).unwrap()).unwrap();
        assert_relative_eq!(fit.beta_hat, -1.0, max_relative = 1e-12);
        assert!(fit.to_params().is_err());
    }

    #[test]
    fn zero_series_is_degenerate() {
        let x = vec![0.0; 50];
        assert!(matches!(
            ar1_ols(&MispricingSeries::from_values(x).unwrap()),
            Err(Error::DegenerateSeries(_))
        ));
    }

    #[test]
    fn recovers_simulated_coefficient() {
        let p = Ar1Params::new(0.5, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 999, 2718).unwrap();
        let path = simulate_ar1(&p, &grid, Start::Stationary, 0);
        let fit = ar1_ols(&MispricingSeries::from_values(path.values().to_vec()).unwrap()).unwrap();
        assert!(
            (fit.beta_hat - 0.5).abs() <= 4.0 * fit.beta_stderr,
            "beta_hat = {} +- {}",
            fit.beta_hat,
            fit.beta_stderr
        );
        assert_relative_eq!(fit.sigma_hat, 0.01, max_relative = 0.15);
    }

    #[test]
    fn coefficient_coverage_across_seeds() {
        // 4-stderr coverage at n = 1000 across betas and seeds
        for &beta in &[0.3, 0.5, 0.9] {
            let p = Ar1Params::new(beta, 0.01).unwrap();
            let mut hits = 0;
            let seeds = 50;
            for seed in 0..seeds {
                let grid = PathGrid::new(1.0, 999, 9000 + seed).unwrap();
                let path = simulate_ar1(&p, &grid, Start::Stationary, 0);
                let fit =
                    ar1_ols(&MispricingSeries::from_values(path.values().to_vec()).unwrap())
                        .unwrap();
                if (fit.beta_hat - beta).abs() <= 4.0 * fit.beta_stderr {
                    hits += 1;
                }
            }
            assert!(hits >= 45, "beta = {beta}: only {hits}/{seeds} inside 4 stderr");
        }
    }

    #[test]
    fn durbin_watson_hand_values() {
        // perfectly alternating residuals, n = 4: (2^2 + 2^2 + 2^2) / 4 = 3
        let dw = durbin_watson(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(dw, 3.0, epsilon = 1e-15);
        // constant residuals: numerator zero
        let dw = durbin_watson(&[0.7, 0.7, 0.7]).unwrap();
        assert_abs_diff_eq!(dw, 0.0);
        assert!(durbin_watson(&[0.0, 0.0]).is_err());
        assert!(durbin_watson(&[1.0]).is_err());
        // long alternating series approaches 4
        let alt: Vec<f64> = (0..2000).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(durbin_watson(&alt).unwrap() > 3.99);
    }

    #[test]
    fn durbin_watson_near_two_for_white_noise() {
        let mut rng = crate::process::stream_rng(555, 0);
        use rand_distr::{Distribution, StandardNormal};
        let res: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let dw = durbin_watson(&res).unwrap();
        // se of DW about 2/sqrt(n)
        assert!((dw - 2.0).abs() <= 3.0 * 2.0 / (res.len() as f64).sqrt(), "dw = {dw}");
    }

    #[test]
    fn durbin_watson_tracks_residual_autocorrelation() {
        // DW == 2 (1 - r1) + o(1) on fitted residuals
        let p = Ar1Params::new(0.5, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 4999, 31).unwrap();
        let path = simulate_ar1(&p, &grid, Start::Stationary, 0);
        let series = MispricingSeries::from_values(path.values().to_vec()).unwrap();
        let fit = ar1_ols(&series).unwrap();
        let x = series.values();
        let residuals: Vec<f64> = (1..x.len()).map(|t| x[t] - fit.beta_hat * x[t - 1]).collect();
        let m = crate::stats::mean(&residuals);
        let num: f64 = residuals.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = residuals.iter().map(|e| (e - m) * (e - m)).sum();
        let r1 = num / den;
        assert!((fit.durbin_watson - 2.0 * (1.0 - r1)).abs() <= 0.05);
        assert!(fit.durbin_watson >= 0.0 && fit.durbin_watson <= 4.0);
    }

    #[test]
    fn summary_examples() {
        let s = summary_stats(&MispricingSeries::from_values(vec![0.0, 0.0, 0.0]).unwrap());
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.n, 3);

        let s = summary_stats(&MispricingSeries::from_values(vec![-1.0, 1.0]).unwrap());
        assert_abs_diff_eq!(s.mean, 0.0);
        assert_abs_diff_eq!(s.std, 2.0f64.sqrt(), epsilon = 1e-15);
        assert_eq!((s.min, s.max), (-1.0, 1.0));

        // stationary simulated stats approach (0, sqrt(Sigma))
        let p = Ar1Params::new(0.5, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 100_000, 77).unwrap();
        let path = simulate_ar1(&p, &grid, Start::Stationary, 0);
        let s = summary_stats(&MispricingSeries::from_values(path.values().to_vec()).unwrap());
        assert_abs_diff_eq!(s.mean, 0.0, epsilon = 3e-4);
        assert_relative_eq!(s.std, p.stationary_variance().sqrt(), max_relative = 0.02);
    }

    #[test]
    fn csv_ingestion_happy_path_and_errors() {
        let good = "date,price,nav\n2020-01-02,10.05,10.0\n2020-01-03,10.10,10.02\n";
        let series = PriceSeries::from_csv_reader(good.as_bytes()).unwrap();
        assert_eq!(series.len(), 2);
        assert_abs_diff_eq!(series.price()[1], 10.10);

        let bad_header = "day,price,nav\n2020-01-02,1,1\n";
        match PriceSeries::from_csv_reader(bad_header.as_bytes()) {
            Err(Error::Ingestion { line: 1, .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }

        let negative = "date,price,nav\n2020-01-02,10.0,10.0\n2020-01-03,-3.0,10.0\n";
        match PriceSeries::from_csv_reader(negative.as_bytes()) {
            Err(Error::Ingestion { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("price"));
            }
            other => panic!("expected row error, got {other:?}"),
        }

        let stale = "date,price,nav\n2020-01-03,1.0,1.0\n2020-01-02,1.0,1.0\n";
        match PriceSeries::from_csv_reader(stale.as_bytes()) {
            Err(Error::Ingestion { line: 3, .. }) => {}
            other => panic!("expected date-order error, got {other:?}"),
        }

        let garbled = "date,price,nav\n2020-01-02,ten,1.0\n";
        assert!(matches!(
            PriceSeries::from_csv_reader(garbled.as_bytes()),
            Err(Error::Ingestion { line: 2, .. })
        ));
    }

    #[test]
    fn intercept_mode_is_close_to_plain_on_centered_data() {
        let p = Ar1Params::new(0.5, 0.01).unwrap();
        let grid = PathGrid::new(1.0, 2000, 99).unwrap();
        let path = simulate_ar1(&p, &grid, Start::Stationary, 0);
        let series = MispricingSeries::from_values(path.values().to_vec()).unwrap();
        let plain = ar1_ols(&series).unwrap();
        let with = ar1_ols_with_intercept(&series).unwrap();
        assert!((plain.beta_hat - with.beta_hat).abs() < 0.05);
        assert!(with.intercept.abs() < 3.0 * plain.sigma_hat);
        assert_eq!(plain.intercept, 0.0);
    }
}
