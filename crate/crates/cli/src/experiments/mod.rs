//! The experiment implementations behind the subcommands. Each takes a
//! resolved [`RunConfig`](crate::config::RunConfig), computes a structured
//! report, and leaves file emission to [`report`](crate::report).

pub mod chsh;
pub mod negopt;
pub mod params;
pub mod tfim;

use qcq_core::stats;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Independent sub-seed for task `salt` of a run (splitmix64 step), so
/// grid points and repetitions never share generator streams.
pub fn subseed(master: u64, salt: u64) -> u64 {
    let mut z = master
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Least-squares line with a Student-t confidence interval on the slope.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub confidence: f64,
    pub slope_ci_low: f64,
    pub slope_ci_high: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fit y against x; needs at least three points for a finite interval.
pub fn fit_with_ci(xs: &[f64], ys: &[f64], confidence: f64) -> Option<FitReport> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return None;
    }
    let fit = stats::linear_fit(xs, ys).ok()?;
    let df = (xs.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .ok()?
        .inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    Some(FitReport {
        slope: fit.slope,
        intercept: fit.intercept,
        slope_stderr: fit.slope_stderr,
        confidence,
        slope_ci_low: fit.slope - t * fit.slope_stderr,
        slope_ci_high: fit.slope + t * fit.slope_stderr,
        r_squared: fit.r_squared,
        points: xs.len(),
    })
}
