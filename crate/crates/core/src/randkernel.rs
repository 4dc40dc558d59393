//! The random kernel `K(x, y; omega) = sum_I a_I psi_I(x) psi_I(y)`, its
//! centered part, its mean, its `x`-derivative and the deterministic square
//! sums that control every variance factor.
//!
//! All infinite series are truncated to the scale range of a [`KernelJob`]
//! and carry a certified bound on what was left out.

use serde::{Deserialize, Serialize};

use crate::dyadic::{dyadic_distance, pow2};
use crate::error::{Error, Result};
use crate::subgauss::{CoefficientModel, Realization};
use crate::wavelets::{exact_point, PairExpansion, Quantity, Term, WaveletFamily};

/// Scale range and tolerance for a truncated series.
///
/// Translations are never truncated: for Haar only the ancestors of the
/// smallest common interval contribute, and for a tabulated wavelet the
/// window of translations where both factors are nonzero is finite and
/// enumerated exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelJob {
    /// Coarsest scale `j` kept.
    pub scale_min: i32,
    /// Finest scale `j` kept.
    pub scale_max: i32,
    /// Largest tail bound a value may carry and still count as certified.
    pub tail_tol: f64,
}

impl Default for KernelJob {
    fn default() -> Self {
        KernelJob {
            scale_min: -20,
            scale_max: 20,
            tail_tol: 1e-10,
        }
    }
}

impl KernelJob {
    pub fn new(scale_min: i32, scale_max: i32, tail_tol: f64) -> Result<Self> {
        let job = KernelJob {
            scale_min,
            scale_max,
            tail_tol,
        };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale_min > self.scale_max {
            return Err(Error::invalid(format!(
                "scale_min {} exceeds scale_max {}",
                self.scale_min, self.scale_max
            )));
        }
        if self.scale_min < -1000 || self.scale_max > 1000 {
            return Err(Error::invalid("scale range must lie within [-1000, 1000]"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::invalid("tail_tol must be positive"));
        }
        Ok(())
    }

    pub fn scales(&self) -> usize {
        (self.scale_max - self.scale_min + 1) as usize
    }
}

/// A truncated evaluation and a certified bound on the omitted part.
///
/// For random quantities the bound is a variance factor: the omitted part
/// lies in `G(tail_bound)` (plus, for nonzero means, a deterministic part
/// bounded by the same number).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
}

impl KernelValue {
    pub fn exact(value: f64) -> Self {
        KernelValue {
            value,
            tail_bound: 0.0,
        }
    }

    pub fn is_certified(&self, job: &KernelJob) -> bool {
        self.tail_bound <= job.tail_tol
    }
}

/// `sum_I |psi_I(x)|^2 |psi_I(y)|^2`. The Haar coarse tail is completed in
/// closed form, so the Haar value is exact: `(4/3) / delta(x, y)^2`.
pub fn square_summability(
    w: &WaveletFamily,
    x: f64,
    y: f64,
    job: &KernelJob,
) -> Result<KernelValue> {
    let exp = w.expand_pair(x, y, job, false)?;
    let kept: f64 = exp.terms.iter().map(|t| t.product().powi(2)).sum();
    let tail = exp.omitted_bound(Quantity::Square);
    Ok(if w.is_haar() {
        KernelValue::exact(kept + tail)
    } else {
        KernelValue {
            value: kept,
            tail_bound: tail,
        }
    })
}

/// `sum_I |I|^-2 |psi~_I(x)|^2 |psi_I(y)|^2 = sum_I |d psi_I(x)|^2 |psi_I(y)|^2`.
pub fn gradient_square_summability(
    w: &WaveletFamily,
    x: f64,
    y: f64,
    job: &KernelJob,
) -> Result<KernelValue> {
    if !w.has_derivative() {
        return Err(Error::DerivativeUnavailable("haar"));
    }
    let exp = w.expand_pair(x, y, job, true)?;
    Ok(KernelValue {
        value: exp.terms.iter().map(|t| t.grad_product().powi(2)).sum(),
        tail_bound: exp.omitted_bound(Quantity::GradSquare),
    })
}

/// A pair expansion bound to a coefficient model, reused across realizations.
#[derive(Clone, Debug)]
pub struct PreparedPair {
    model: CoefficientModel,
    expansion: PairExpansion,
    means: Vec<f64>,
    with_derivative: bool,
}

impl PreparedPair {
    pub fn new(
        w: &WaveletFamily,
        model: &CoefficientModel,
        x: f64,
        y: f64,
        job: &KernelJob,
        with_derivative: bool,
    ) -> Result<Self> {
        model.validate()?;
        let expansion = w.expand_pair(x, y, job, with_derivative)?;
        let means = expansion
            .terms
            .iter()
            .map(|t| model.mean_at(t.index))
            .collect();
        Ok(PreparedPair {
            model: *model,
            expansion,
            means,
            with_derivative,
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.expansion.terms
    }

    pub fn expansion(&self) -> &PairExpansion {
        &self.expansion
    }

    fn fluctuations<'a>(
        &'a self,
        omega: &'a Realization,
    ) -> impl Iterator<Item = (f64, &'a Term)> + 'a {
        self.expansion
            .terms
            .iter()
            .map(move |t| (self.model.fluctuation_at(&omega.path(t.index)), t))
    }

    fn random_tail(&self, q: Quantity) -> f64 {
        if self.model.nu() == 0.0 {
            0.0
        } else {
            8.0 * self.model.nu() * self.expansion.omitted_bound(q)
        }
    }

    fn mean_tail(&self, q: Quantity) -> f64 {
        let sup = self.model.mean_sup();
        if sup == 0.0 {
            0.0
        } else {
            sup * self.expansion.omitted_bound(q)
        }
    }

    /// `K(x, y) = sum E a_I psi_I(x) psi_I(y)`.
    pub fn mean(&self) -> KernelValue {
        KernelValue {
            value: self
                .means
                .iter()
                .zip(&self.expansion.terms)
                .map(|(m, t)| m * t.product())
                .sum(),
            tail_bound: self.mean_tail(Quantity::Abs),
        }
    }

    /// `Sigma(x, y; omega)`.
    pub fn centered(&self, omega: &Realization) -> KernelValue {
        KernelValue {
            value: self.fluctuations(omega).map(|(f, t)| f * t.product()).sum(),
            tail_bound: self.random_tail(Quantity::Square),
        }
    }

    /// `K(x, y; omega)`.
    pub fn full(&self, omega: &Realization) -> KernelValue {
        let value = self
            .fluctuations(omega)
            .zip(&self.means)
            .map(|((f, t), m)| (m + f) * t.product())
            .sum();
        KernelValue {
            value,
            tail_bound: self.random_tail(Quantity::Square) + self.mean_tail(Quantity::Abs),
        }
    }

    fn require_derivative(&self) -> Result<()> {
        if self.with_derivative {
            Ok(())
        } else {
            Err(Error::DerivativeUnavailable(
                "pair prepared without derivatives",
            ))
        }
    }

    /// `d/dx Sigma(x, y; omega)`.
    pub fn centered_dx(&self, omega: &Realization) -> Result<KernelValue> {
        self.require_derivative()?;
        Ok(KernelValue {
            value: self
                .fluctuations(omega)
                .map(|(f, t)| f * t.grad_product())
                .sum(),
            tail_bound: self.random_tail(Quantity::GradSquare),
        })
    }

    /// `(Sigma, d Sigma / dx)` from a single pass over the coefficients.
    pub fn centered_with_dx(&self, omega: &Realization) -> Result<(f64, f64)> {
        self.require_derivative()?;
        Ok(self.fluctuations(omega).fold((0.0, 0.0), |(v, d), (f, t)| {
            (v + f * t.product(), d + f * t.grad_product())
        }))
    }

    /// `d/dx K(x, y; omega)`.
    pub fn full_dx(&self, omega: &Realization) -> Result<KernelValue> {
        self.require_derivative()?;
        let value = self
            .fluctuations(omega)
            .zip(&self.means)
            .map(|((f, t), m)| (m + f) * t.grad_product())
            .sum();
        Ok(KernelValue {
            value,
            tail_bound: self.random_tail(Quantity::GradSquare) + self.mean_tail(Quantity::GradAbs),
        })
    }

    /// Exact `E |Sigma_kept|^2 = Var(a) sum_kept c_I^2` by independence.
    pub fn centered_second_moment(&self) -> f64 {
        self.model.variance()
            * self
                .expansion
                .terms
                .iter()
                .map(|t| t.product().powi(2))
                .sum::<f64>()
    }

    /// Exact `E |d Sigma_kept / dx|^2`.
    pub fn centered_dx_second_moment(&self) -> Result<f64> {
        self.require_derivative()?;
        Ok(self.model.variance()
            * self
                .expansion
                .terms
                .iter()
                .map(|t| t.grad_product().powi(2))
                .sum::<f64>())
    }
}

pub fn mean_kernel(
    w: &WaveletFamily,
    model: &CoefficientModel,
    x: f64,
    y: f64,
    job: &KernelJob,
) -> Result<KernelValue> {
    if model.is_zero_mean() {
        if x == y {
            return Err(Error::DegeneratePair);
        }
        return Ok(KernelValue::exact(0.0));
    }
    Ok(PreparedPair::new(w, model, x, y, job, false)?.mean())
}

pub fn sample_kernel(
    w: &WaveletFamily,
    model: &CoefficientModel,
    x: f64,
    y: f64,
    job: &KernelJob,
    omega: &Realization,
) -> Result<KernelValue> {
    Ok(PreparedPair::new(w, model, x, y, job, false)?.full(omega))
}

pub fn sample_centered_kernel(
    w: &WaveletFamily,
    model: &CoefficientModel,
    x: f64,
    y: f64,
    job: &KernelJob,
    omega: &Realization,
) -> Result<KernelValue> {
    Ok(PreparedPair::new(w, model, x, y, job, false)?.centered(omega))
}

/// `d/dx K(x, y; omega)`, the derivative of [`sample_kernel`] in `x`.
pub fn sample_kernel_dx(
    w: &WaveletFamily,
    model: &CoefficientModel,
    x: f64,
    y: f64,
    job: &KernelJob,
    omega: &Realization,
) -> Result<KernelValue> {
    if !w.has_derivative() {
        return Err(Error::DerivativeUnavailable("haar"));
    }
    PreparedPair::new(w, model, x, y, job, true)?.full_dx(omega)
}

/// `d/dx Sigma(x, y; omega)`, the derivative of the centered kernel.
pub fn sample_centered_kernel_dx(
    w: &WaveletFamily,
    model: &CoefficientModel,
    x: f64,
    y: f64,
    job: &KernelJob,
    omega: &Realization,
) -> Result<KernelValue> {
    if !w.has_derivative() {
        return Err(Error::DerivativeUnavailable("haar"));
    }
    PreparedPair::new(w, model, x, y, job, true)?.centered_dx(omega)
}

/// Checks that moving `x` to `x_prime` inside its half of the common
/// interval changes nothing: both Haar expansions must have bitwise equal
/// term sequences and the realized kernels must be bitwise equal.
///
/// Requires `2 delta(x', x) <= delta(x, y)`.
pub fn haar_regularity_check(
    model: &CoefficientModel,
    x: f64,
    x_prime: f64,
    y: f64,
    job: &KernelJob,
    omega: &Realization,
) -> Result<bool> {
    let (px, pxp, py) = (exact_point(x)?, exact_point(x_prime)?, exact_point(y)?);
    let d_xy = dyadic_distance(px, py);
    if d_xy == 0.0 {
        return Err(Error::DegeneratePair);
    }
    if 2.0 * dyadic_distance(pxp, px) > d_xy {
        return Err(Error::HypothesisUnmet(format!(
            "2 delta(x', x) = {} exceeds delta(x, y) = {d_xy}",
            2.0 * dyadic_distance(pxp, px)
        )));
    }
    let w = WaveletFamily::haar();
    let a = PreparedPair::new(&w, model, x, y, job, false)?;
    let b = PreparedPair::new(&w, model, x_prime, y, job, false)?;
    let same_terms = a.terms().len() == b.terms().len()
        && a.terms().iter().zip(b.terms()).all(|(s, t)| {
            s.index == t.index
                && s.at_x.to_bits() == t.at_x.to_bits()
                && s.at_y.to_bits() == t.at_y.to_bits()
        });
    Ok(same_terms && a.full(omega).value.to_bits() == b.full(omega).value.to_bits())
}

/// Exact Haar envelope `sqrt(8 nu (4/3)) / delta(x, y)` for `||Sigma(x, y)||_2`.
pub fn haar_size_envelope(nu: f64, delta: f64) -> f64 {
    (8.0 * nu * 4.0 / 3.0).sqrt() / delta
}

/// `delta(x, y)` for floats that are dyadic rationals.
pub fn dyadic_distance_f64(x: f64, y: f64) -> Result<f64> {
    Ok(dyadic_distance(exact_point(x)?, exact_point(y)?))
}

/// Length of the interval at scale `j`.
pub fn scale_length(j: i32) -> f64 {
    pow2(-j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgauss::MeanProfile;

    fn haar() -> WaveletFamily {
        WaveletFamily::haar()
    }

    #[test]
    fn job_validation() {
        assert!(KernelJob::new(3, 2, 1e-10).is_err());
        assert!(KernelJob::new(-2, 2, 0.0).is_err());
        assert_eq!(KernelJob::default().scales(), 41);
    }

    #[test]
    fn haar_square_sums() {
        let job = KernelJob::default();
        let v = square_summability(&haar(), 0.25, 0.75, &job).unwrap();
        assert_eq!(v, KernelValue::exact(4.0 / 3.0));
        let v = square_summability(&haar(), 0.125, 0.375, &job).unwrap();
        assert!((v.value - 16.0 / 3.0).abs() < 1e-14);
        assert!(matches!(
            square_summability(&haar(), 0.3, 0.3, &job),
            Err(Error::DegeneratePair)
        ));
    }

    #[test]
    fn haar_mean_kernel_by_hand() {
        // x = 1/8, y = 3/8: I(x, y) = (1, 0), ancestors (0, 0), (-1, 0), ...
        // Products -2, 1, 1/2, ...; means 2^-|j| with mu0 = 1.
        let job = KernelJob {
            scale_min: -1,
            scale_max: 5,
            ..KernelJob::default()
        };
        let m = CoefficientModel::gaussian(1.0).with_mean(MeanProfile::Geometric { mu0: 1.0 });
        let k = mean_kernel(&haar(), &m, 0.125, 0.375, &job).unwrap();
        let hand = 0.5 * -2.0 + 1.0 * 1.0 + 0.5 * 0.5;
        assert!((k.value - hand).abs() < 1e-15);
        // Remaining ancestors have |c| = 2^-2, 2^-3, ... and |mean| <= 1.
        assert!((k.tail_bound - 0.5).abs() < 1e-15);
        let zero = mean_kernel(
            &haar(),
            &CoefficientModel::gaussian(1.0),
            0.125,
            0.375,
            &job,
        )
        .unwrap();
        assert_eq!(zero, KernelValue::exact(0.0));
    }

    #[test]
    fn rademacher_terms_have_unit_size() {
        let job = KernelJob::default();
        let p = PreparedPair::new(
            &haar(),
            &CoefficientModel::rademacher(),
            0.125,
            0.375,
            &job,
            false,
        )
        .unwrap();
        let delta = 0.5;
        for (l, t) in p.terms().iter().enumerate() {
            assert_eq!(t.product().abs(), pow2(-(l as i32)) / delta);
        }
    }

    #[test]
    fn finer_scales_do_not_change_haar_values() {
        let m = CoefficientModel::gaussian(1.0);
        let omega = Realization::new(4, 2);
        let a = KernelJob {
            scale_max: 10,
            ..KernelJob::default()
        };
        let b = KernelJob {
            scale_max: 20,
            ..KernelJob::default()
        };
        let va = sample_kernel(&haar(), &m, 0.125, 0.625, &a, &omega).unwrap();
        let vb = sample_kernel(&haar(), &m, 0.125, 0.625, &b, &omega).unwrap();
        assert_eq!(va.value.to_bits(), vb.value.to_bits());
    }

    #[test]
    fn decomposition_and_symmetry() {
        let m = CoefficientModel::gaussian(2.0).with_mean(MeanProfile::Geometric { mu0: 0.7 });
        let job = KernelJob::default();
        let omega = Realization::new(1, 9);
        let full = sample_kernel(&haar(), &m, 0.3125, 0.8125, &job, &omega).unwrap();
        let centered = sample_centered_kernel(&haar(), &m, 0.3125, 0.8125, &job, &omega).unwrap();
        let mean = mean_kernel(&haar(), &m, 0.3125, 0.8125, &job).unwrap();
        assert!(
            (full.value - centered.value - mean.value).abs() <= 1e-12 * full.value.abs().max(1.0)
        );
        let swapped = sample_kernel(&haar(), &m, 0.8125, 0.3125, &job, &omega).unwrap();
        assert_eq!(full.value, swapped.value);
    }

    #[test]
    fn regularity_examples() {
        let m = CoefficientModel::gaussian(1.0);
        let job = KernelJob::default();
        let omega = Realization::new(0, 0);
        assert!(haar_regularity_check(&m, 0.125, 0.1875, 0.75, &job, &omega).unwrap());
        assert!(haar_regularity_check(&m, 0.125, 0.125, 0.75, &job, &omega).unwrap());
        assert!(matches!(
            haar_regularity_check(&m, 0.125, 0.625, 0.75, &job, &omega),
            Err(Error::HypothesisUnmet(_))
        ));
    }

    #[test]
    fn tail_certificates_shrink_with_range() {
        let m = CoefficientModel::gaussian(1.0);
        let omega = Realization::new(0, 0);
        let mut prev = f64::INFINITY;
        for smin in [-2, -5, -10, -20] {
            let job = KernelJob {
                scale_min: smin,
                ..KernelJob::default()
            };
            let v = sample_kernel(&haar(), &m, 0.25, 0.75, &job, &omega).unwrap();
            assert!(v.tail_bound <= prev);
            prev = v.tail_bound;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn haar_has_no_derivative() {
        let m = CoefficientModel::gaussian(1.0);
        let omega = Realization::new(0, 0);
        assert!(matches!(
            sample_kernel_dx(&haar(), &m, 0.25, 0.75, &KernelJob::default(), &omega),
            Err(Error::DerivativeUnavailable(_))
        ));
    }
}
