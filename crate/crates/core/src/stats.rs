//! Sampling and summary-statistics helpers shared by the simulator and
//! the experiment drivers.

use crate::error::{Error, Result};

/// Draw an index from an unnormalized probability vector given a uniform
/// variate `u ∈ [0, 1)`. Negative entries (numerical noise) count as zero,
/// and zero-probability indices are never returned.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    debug_assert!(!probs.is_empty());
    let mut cum = Vec::with_capacity(probs.len());
    let mut total = 0.0;
    for &p in probs {
        total += p.max(0.0);
        cum.push(total);
    }
    let target = u * total;
    let mut idx = cum.partition_point(|&c| c <= target);
    if idx >= probs.len() {
        idx = probs.len() - 1;
    }
    while idx > 0 && probs[idx] <= 0.0 {
        idx -= 1;
    }
    idx
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n − 1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// (mean, standard error of the mean).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, f64::INFINITY);
    }
    (m, sample_std(xs) / (xs.len() as f64).sqrt())
}

/// Ordinary least-squares fit of y = slope·x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (residual-based, n − 2 dof).
    pub slope_stderr: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::InvalidParam(format!(
            "linear fit needs two or more paired points, got {n} and {}",
            ys.len()
        )));
    }
    let xbar = mean(xs);
    let ybar = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParam("degenerate fit: all x equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let slope_stderr = if n > 2 {
        (ss_res / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearFit { slope, intercept, slope_stderr, r_squared })
}

/// Least-squares fit of y = coef·x (no intercept). Returns (coef, R²),
/// with R² computed against the mean-of-y baseline.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n == 0 {
        return Err(Error::InvalidParam(format!(
            "origin fit needs paired points, got {n} and {}",
            ys.len()
        )));
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParam("degenerate fit: all x zero".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let coef = sxy / sxx;
    let ybar = mean(ys);
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - coef * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((coef, r_squared))
}
