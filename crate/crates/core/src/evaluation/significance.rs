use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignificanceResult {
    /// Standardized mean of the paired differences `a - b`.
    pub statistic: f64,
    /// Positive critical value; the acceptance region is `(-critical, +inf)`.
    pub critical: f64,
    /// True when `a` is significantly lower than `b`.
    pub reject: bool,
    pub n: usize,
}

/// Upper `level` quantile of the standard normal distribution.
pub fn critical_value(level: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(1.0 - level)
}

/// One-sided paired test of "mean(a) < mean(b)" under the normal
/// approximation: z = mean(d) / (sd(d) / sqrt(n)) with d = a - b.
pub fn significance_test(errors_a: &[f64], errors_b: &[f64], level: f64) -> Result<SignificanceResult> {
    let n = errors_a.len();
    if n != errors_b.len() || n < 2 {
        return Err(Error::LengthMismatch(n, errors_b.len()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Range(format!("significance level {level} outside (0, 1)")));
    }
    let diffs: Vec<f64> = errors_a.iter().zip(errors_b).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let statistic = if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    };
    let critical = critical_value(level);
    Ok(SignificanceResult {
        statistic,
        critical,
        reject: statistic < -critical,
        n,
    })
}
