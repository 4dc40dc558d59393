//! Subgaussian coefficient models and their tail and moment calculus.
//!
//! A random variable `X` is in `G(nu)` when `log E exp(l (X - EX)) <= l^2 nu / 2`
//! for every real `l`. The coefficient laws shipped here are all symmetric
//! about their mean and carry a known variance factor:
//!
//! | law | `nu` |
//! |-----|------|
//! | Gaussian with variance `s^2` | `s^2` |
//! | Rademacher | `1` |
//! | uniform on `[a, b]` | `(b - a)^2 / 4` |
//! | standard normal conditioned on `[-A, A]` | `min(1, A^2)` |
//! | point mass | `0` |

mod sampling;
mod series;

use libm::{erf, erfc};
use serde::{Deserialize, Serialize};

use crate::dyadic::{pow2, DyadicIndex};
use crate::error::{Error, Result};

pub use sampling::{
    empirical_log_mgf, empirical_sum_central_moments, empirical_two_sided_tail, sample_coefficient,
    Realization, SeedPath, MAX_SCALED_LAMBDA,
};
pub use series::{three_series_certificate, ThreeSeriesReport, Verdict};

/// Law of the centered fluctuation `a_I - E a_I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum Distribution {
    Gaussian {
        nu: f64,
    },
    Rademacher,
    /// Uniform on `[a, b]`, recentered onto the mean profile.
    BoundedUniform {
        a: f64,
        b: f64,
    },
    /// Standard normal conditioned on `[-bound, bound]`.
    TruncatedGaussian {
        bound: f64,
    },
    /// No fluctuation: `a_I = E a_I` surely.
    Constant,
}

/// Deterministic profile `I -> E a_I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeanProfile {
    /// `E a_{j,k} = mu0 2^-|j| 2^-|k|`, summable over all of `D`.
    Geometric { mu0: f64 },
    /// The same mean for every interval (not summable unless zero).
    Constant { value: f64 },
}

impl Default for MeanProfile {
    fn default() -> Self {
        MeanProfile::Geometric { mu0: 0.0 }
    }
}

/// The law of the independent coefficient family `{a_I}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientModel {
    #[serde(flatten)]
    pub dist: Distribution,
    #[serde(default)]
    pub mean: MeanProfile,
}

impl CoefficientModel {
    pub fn new(dist: Distribution, mean: MeanProfile) -> Result<Self> {
        let model = CoefficientModel { dist, mean };
        model.validate()?;
        Ok(model)
    }

    pub fn gaussian(nu: f64) -> Self {
        CoefficientModel {
            dist: Distribution::Gaussian { nu },
            mean: MeanProfile::default(),
        }
    }

    pub fn rademacher() -> Self {
        CoefficientModel {
            dist: Distribution::Rademacher,
            mean: MeanProfile::default(),
        }
    }

    pub fn bounded_uniform(a: f64, b: f64) -> Self {
        CoefficientModel {
            dist: Distribution::BoundedUniform { a, b },
            mean: MeanProfile::default(),
        }
    }

    pub fn truncated_gaussian(bound: f64) -> Self {
        CoefficientModel {
            dist: Distribution::TruncatedGaussian { bound },
            mean: MeanProfile::default(),
        }
    }

    /// Every coefficient equal to `value`.
    pub fn constant(value: f64) -> Self {
        CoefficientModel {
            dist: Distribution::Constant,
            mean: MeanProfile::Constant { value },
        }
    }

    pub fn with_mean(mut self, mean: MeanProfile) -> Self {
        self.mean = mean;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        match self.dist {
            Distribution::Gaussian { nu } if !finite_pos(nu) => {
                return Err(Error::invalid(format!(
                    "Gaussian variance factor {nu} must be positive"
                )))
            }
            Distribution::BoundedUniform { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                return Err(Error::invalid(format!(
                    "uniform support [{a}, {b}] is empty"
                )))
            }
            Distribution::TruncatedGaussian { bound } if !finite_pos(bound) => {
                return Err(Error::invalid(format!(
                    "truncation bound {bound} must be positive"
                )))
            }
            _ => {}
        }
        let mean_value = match self.mean {
            MeanProfile::Geometric { mu0 } => mu0,
            MeanProfile::Constant { value } => value,
        };
        if !mean_value.is_finite() {
            return Err(Error::invalid("mean profile must be finite"));
        }
        if self.dist == Distribution::Rademacher && mean_value != 0.0 {
            return Err(Error::invalid(
                "Rademacher coefficients are centered; the mean profile must be zero",
            ));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self.dist {
            Distribution::Gaussian { nu } => format!("gaussian(nu={nu})"),
            Distribution::Rademacher => "rademacher".into(),
            Distribution::BoundedUniform { a, b } => format!("uniform[{a},{b}]"),
            Distribution::TruncatedGaussian { bound } => format!("truncated-gaussian({bound})"),
            Distribution::Constant => "constant".into(),
        }
    }

    /// Variance factor `nu` certifying membership in `G(nu)`.
    pub fn nu(&self) -> f64 {
        match self.dist {
            Distribution::Gaussian { nu } => nu,
            Distribution::Rademacher => 1.0,
            Distribution::BoundedUniform { a, b } => (b - a).powi(2) / 4.0,
            // Conditioning a standard normal on a convex set keeps it
            // 1-strongly log-concave; boundedness gives A^2.
            Distribution::TruncatedGaussian { bound } => bound.powi(2).min(1.0),
            Distribution::Constant => 0.0,
        }
    }

    /// Exact `Var(a_I)`.
    pub fn variance(&self) -> f64 {
        match self.dist {
            Distribution::Gaussian { nu } => nu,
            Distribution::Rademacher => 1.0,
            Distribution::BoundedUniform { a, b } => (b - a).powi(2) / 12.0,
            Distribution::TruncatedGaussian { bound } => {
                1.0 - 2.0 * bound * normal_pdf(bound) / erf(bound / std::f64::consts::SQRT_2)
            }
            Distribution::Constant => 0.0,
        }
    }

    /// Every shipped law is symmetric about its mean.
    pub fn is_symmetric(&self) -> bool {
        true
    }

    pub fn mean_at(&self, i: DyadicIndex) -> f64 {
        match self.mean {
            MeanProfile::Geometric { mu0 } => {
                if mu0 == 0.0 {
                    0.0
                } else {
                    mu0 * pow2(-i.j.abs()) * pow2(-(i.k.unsigned_abs().min(2000) as i32))
                }
            }
            MeanProfile::Constant { value } => value,
        }
    }

    /// Largest `|E a_I|` over all intervals.
    pub fn mean_sup(&self) -> f64 {
        match self.mean {
            MeanProfile::Geometric { mu0 } => mu0.abs(),
            MeanProfile::Constant { value } => value.abs(),
        }
    }

    /// `sum_I |E a_I|` in closed form; `sum_j 2^-|j| = 3` in each index.
    pub fn mean_profile_l1(&self) -> f64 {
        match self.mean {
            MeanProfile::Geometric { mu0 } => 9.0 * mu0.abs(),
            MeanProfile::Constant { value: 0.0 } => 0.0,
            MeanProfile::Constant { .. } => f64::INFINITY,
        }
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean_sup() == 0.0
    }

    /// Whether `sum_I E|a_I| < infinity` holds literally. It fails for every
    /// nondegenerate independent family with a common law (each term is at
    /// least `E|a_I - E a_I| > 0`), Rademacher included; the bounds in this
    /// crate then use `sum_I |E a_I|` from [`Self::mean_profile_l1`].
    pub fn abs_moment_summable(&self) -> bool {
        self.variance() == 0.0 && self.mean_profile_l1().is_finite()
    }

    /// `P{|a_I - E a_I| > s}` for `s >= 0`.
    pub fn fluctuation_tail(&self, s: f64) -> f64 {
        match self.dist {
            Distribution::Gaussian { nu } => erfc(s / (2.0 * nu).sqrt()),
            Distribution::Rademacher => {
                if s < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::BoundedUniform { a, b } => (1.0 - 2.0 * s / (b - a)).max(0.0),
            Distribution::TruncatedGaussian { bound } => {
                if s >= bound {
                    0.0
                } else {
                    let r2 = std::f64::consts::SQRT_2;
                    (erf(bound / r2) - erf(s / r2)) / erf(bound / r2)
                }
            }
            Distribution::Constant => 0.0,
        }
    }

    /// Mean and variance of the truncation `X_A = X 1{|X| <= A}` of the
    /// centered fluctuation `X = a_I - E a_I`.
    pub fn truncated_moments(&self, a: f64) -> Result<(f64, f64)> {
        if !(a > 0.0) {
            return Err(Error::invalid(format!(
                "truncation level {a} must be positive"
            )));
        }
        // E X_A = int_{[-A, A]} x dmu vanishes for symmetric laws, so the
        // variance is the truncated second moment.
        let second = match self.dist {
            Distribution::Gaussian { nu } => {
                let s = nu.sqrt();
                nu * gaussian_truncated_second(a / s)
            }
            Distribution::Rademacher => {
                if a >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::BoundedUniform { a: lo, b: hi } => {
                let h = 0.5 * (hi - lo);
                let c = a.min(h);
                c.powi(3) / (3.0 * h)
            }
            Distribution::TruncatedGaussian { bound } => {
                gaussian_truncated_second(a.min(bound)) / erf(bound / std::f64::consts::SQRT_2)
            }
            Distribution::Constant => 0.0,
        };
        Ok((0.0, second))
    }
}

pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `int_{-a}^{a} x^2 phi(x) dx = (2 Phi(a) - 1) - 2 a phi(a)`.
fn gaussian_truncated_second(a: f64) -> f64 {
    erf(a / std::f64::consts::SQRT_2) - 2.0 * a * normal_pdf(a)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// One-sided Cramer-Chernoff bound `P{X - EX >= t} <= exp(-t^2 / (2 nu))`.
pub fn chernoff_tail(nu: f64, t: f64) -> Result<f64> {
    positive("variance factor", nu)?;
    positive("deviation", t)?;
    Ok((-(t * t) / (2.0 * nu)).exp())
}

/// Two-sided bound `P{|X - EX| >= t} <= min(1, 2 exp(-t^2 / (2 nu)))`.
pub fn two_sided_chernoff(nu: f64, t: f64) -> Result<f64> {
    Ok((2.0 * chernoff_tail(nu, t)?).min(1.0))
}

/// Variance factor of an independent sum: `sum nu_j`.
pub fn combine_variance_factors(nus: &[f64]) -> Result<f64> {
    if nus.is_empty() {
        return Err(Error::invalid("no variance factors to combine"));
    }
    for &nu in nus {
        positive("variance factor", nu)?;
    }
    Ok(nus.iter().sum())
}

/// Certified variance factor `8 nu` of a convergent independent series whose
/// terms have total factor `nu`.
pub fn series_variance_factor(nu_total: f64) -> Result<f64> {
    positive("variance factor", nu_total)?;
    Ok(8.0 * nu_total)
}

/// `||S - ES||_{2k}^{2k} <= k! (2 nu)^k`.
pub fn moment_bound(nu_total: f64, k: u32) -> Result<f64> {
    positive("variance factor", nu_total)?;
    if k == 0 {
        return Err(Error::invalid("moment order k must be at least 1"));
    }
    let factorial: f64 = (1..=k).map(f64::from).product();
    Ok(factorial * (2.0 * nu_total).powi(k as i32))
}
