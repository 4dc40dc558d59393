//! Kolmogorov three-series certificates for the kernel series at a pair.

use serde::{Deserialize, Serialize};

use super::CoefficientModel;
use crate::error::{Error, Result};
use crate::randkernel::KernelJob;
use crate::wavelets::{Quantity, WaveletFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedConvergent,
    Inconclusive,
}

/// Partial sums of the three series for `X_I = (a_I - E a_I) psi_I(x) psi_I(y)`
/// truncated at `A`, with certified bounds on the omitted parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeSeriesReport {
    pub truncation_a: f64,
    /// `sum P{|X_I| > A}`
    pub series1_partial: f64,
    /// `sum E X_I 1{|X_I| <= A}`
    pub series2_partial: f64,
    /// `sum Var(X_I 1{|X_I| <= A})`
    pub series3_partial: f64,
    pub tail_bounds: [f64; 3],
    pub terms: usize,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Builds the certificate over the terms kept by `job`.
///
/// Omitted terms are bounded by the Chernoff tail of each term (first
/// series), by symmetry of the coefficient law (second series, which is
/// then identically zero) and by `Var(a_I)` times the omitted square mass
/// (third series).
#[allow(clippy::too_many_arguments)]
pub fn three_series_certificate(
    model: &CoefficientModel,
    w: &WaveletFamily,
    x: f64,
    y: f64,
    a: f64,
    job: &KernelJob,
    tolerance: f64,
) -> Result<ThreeSeriesReport> {
    model.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!(
            "truncation level {a} must be positive"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::invalid("certificate tolerance must be positive"));
    }
    let exp = w.expand_pair(x, y, job, false)?;
    let (mut s1, mut s3) = (0.0, 0.0);
    for term in &exp.terms {
        let c = term.product().abs();
        if c == 0.0 {
            continue;
        }
        let level = a / c;
        s1 += model.fluctuation_tail(level);
        s3 += c * c * model.truncated_moments(level)?.1;
    }
    // E Y_I = c E[X 1{|X| <= A/|c|}] = 0 for a law symmetric about its mean.
    debug_assert!(model.is_symmetric());
    let s2 = 0.0;
    let r1 = exp.omitted_chernoff(a, model.nu());
    let r2 = 0.0;
    let r3 = model.variance() * exp.omitted_bound(Quantity::Square);
    let tail_bounds = [r1, r2, r3];
    let verdict = if tail_bounds.iter().all(|&r| r < tolerance) {
        Verdict::CertifiedConvergent
    } else {
        Verdict::Inconclusive
    };
    Ok(ThreeSeriesReport {
        truncation_a: a,
        series1_partial: s1,
        series2_partial: s2,
        series3_partial: s3,
        tail_bounds,
        terms: exp.terms.len(),
        tolerance,
        verdict,
    })
}
