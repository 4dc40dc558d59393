//! Monte Carlo summaries, Wilson intervals and a deterministic parallel
//! reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Default two-sided confidence level.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Replicates per work unit in [`par_chunked`].
pub const CHUNK: usize = 256;

/// A Monte Carlo estimate with a two-sided confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl McEstimate {
    /// Normal-approximation interval for the mean of `values`.
    pub fn from_samples(values: &[f64], confidence: f64) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self::from_moments(mean, var, n as u64, confidence)
    }

    /// From a sample mean and unbiased sample variance.
    pub fn from_moments(mean: f64, variance: f64, n: u64, confidence: f64) -> Self {
        let std_error = (variance.max(0.0) / n as f64).sqrt();
        let half = z_quantile(confidence) * std_error;
        McEstimate {
            mean,
            std_error,
            n,
            ci_low: mean - half,
            ci_high: mean + half,
        }
    }

    /// Wilson score interval for a binomial proportion.
    pub fn wilson(successes: u64, n: u64, confidence: f64) -> Self {
        let (low, high) = wilson_interval(successes, n, confidence);
        let p = successes as f64 / n as f64;
        McEstimate {
            mean: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n,
            ci_low: low,
            ci_high: high,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// Half-width relative to `|mean|`.
    pub fn relative_half_width(&self) -> f64 {
        self.half_width() / self.mean.abs()
    }

    /// Applies a monotone increasing map to the estimate and its interval,
    /// propagating the standard error by the delta method.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64, derivative: f64) -> Self {
        McEstimate {
            mean: f(self.mean),
            std_error: self.std_error * derivative.abs(),
            n: self.n,
            ci_low: f(self.ci_low),
            ci_high: f(self.ci_high),
        }
    }

    /// Estimate of `sqrt(E X)` from an estimate of `E X >= 0`.
    pub fn sqrt(&self) -> Self {
        let root = self.mean.max(0.0).sqrt();
        let deriv = if root > 0.0 { 0.5 / root } else { 0.0 };
        self.map_monotone(|v| v.max(0.0).sqrt(), deriv)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Two-sided standard normal quantile: `P{|Z| <= z} = confidence`.
pub fn z_quantile(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(0.5 + 0.5 * confidence)
}

/// Confidence level for each of `m` simultaneous intervals such that all
/// hold jointly with probability at least `confidence` (Bonferroni).
pub fn bonferroni(confidence: f64, m: usize) -> f64 {
    1.0 - (1.0 - confidence) / m.max(1) as f64
}

pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z = z_quantile(confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Ordinary least squares slope and intercept of `y` against `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols(&lx, &ly).0
}

/// Maps replicates `0..n` in fixed chunks, folding each chunk sequentially
/// and combining chunk results in index order.
///
/// Chunk boundaries do not depend on the thread pool, so the result is
/// bitwise identical for any number of worker threads.
pub fn par_chunked<A, F, G>(n: u64, init: impl Fn() -> A + Sync, fold: F, combine: G) -> A
where
    A: Send,
    F: Fn(&mut A, u64) + Sync,
    G: Fn(&mut A, A),
{
    let chunks = n.div_ceil(CHUNK as u64);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let end = ((c + 1) * CHUNK as u64).min(n);
            for r in c * CHUNK as u64..end {
                fold(&mut acc, r);
            }
            acc
        })
        .collect();
    let mut total = init();
    for part in parts {
        combine(&mut total, part);
    }
    total
}

/// Running sums `(count, sum, sum of squares)` for a scalar statistic.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, other: Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn estimate(&self, confidence: f64) -> McEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate::from_moments(mean, var, self.n, confidence)
    }
}

/// Mean of the statistic `f(r)` over replicates `0..n`.
pub fn mc_mean(n: u64, confidence: f64, f: impl Fn(u64) -> f64 + Sync) -> McEstimate {
    par_chunked(
        n,
        Moments::default,
        |acc, r| acc.push(f(r)),
        |acc, part| acc.merge(part),
    )
    .estimate(confidence)
}
