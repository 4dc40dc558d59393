//! The random operator `T f = sum_I a_I <f, psi_I> psi_I` on grid functions.
//!
//! `T` acts on the wavelets whose scale lies in the intersection of the
//! job's range with what the grid resolves: scales from `-m` (the whole
//! domain `[0, 2^m)`) up to the grid depth.

mod grid;
mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randkernel::KernelJob;
use crate::stats::{mc_mean, par_chunked};
use crate::subgauss::{CoefficientModel, Realization};
use crate::wavelets::WaveletFamily;
use crate::McEstimate;

pub use grid::GridFunction;
pub use transform::{
    analyze, effective_scales, pointwise_terms, synthesize, Level, WaveletCoefficients,
    SMOOTH_GUARD,
};

/// Which part of `a_I` multiplies each coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    /// `a_I`
    Full,
    /// `a_I - E a_I`
    Centered,
    /// `E a_I`
    Mean,
}

fn multiplier(
    model: &CoefficientModel,
    omega: &Realization,
    part: Part,
    i: crate::DyadicIndex,
) -> f64 {
    match part {
        Part::Full => model.mean_at(i) + model.fluctuation_at(&omega.path(i)),
        Part::Centered => model.fluctuation_at(&omega.path(i)),
        Part::Mean => model.mean_at(i),
    }
}

/// One realization of `T f` (or its centered or mean part) from analyzed
/// coefficients. Coefficients that vanish do not draw their `a_I`.
pub fn realize(
    w: &WaveletFamily,
    coeffs: &WaveletCoefficients,
    model: &CoefficientModel,
    omega: &Realization,
    part: Part,
) -> GridFunction {
    synthesize(w, coeffs, |i, c| {
        if c == 0.0 {
            0.0
        } else {
            c * multiplier(model, omega, part, i)
        }
    })
}

/// Orthogonal projection of `f` onto the kept wavelets (all `a_I = 1`).
pub fn project(w: &WaveletFamily, coeffs: &WaveletCoefficients) -> GridFunction {
    synthesize(w, coeffs, |_, c| c)
}

/// One realization of `T f` on the grid of `f`.
pub fn apply_t(
    w: &WaveletFamily,
    model: &CoefficientModel,
    f: &GridFunction,
    job: &KernelJob,
    omega: &Realization,
) -> Result<GridFunction> {
    model.validate()?;
    let coeffs = analyze(w, f, job)?;
    Ok(realize(w, &coeffs, model, omega, Part::Full))
}

/// `(T f)(x)` from the terms with `psi_I(x) != 0`.
pub fn sample_operator_at(
    w: &WaveletFamily,
    coeffs: &WaveletCoefficients,
    model: &CoefficientModel,
    x: f64,
    omega: &Realization,
    part: Part,
) -> f64 {
    pointwise_terms(w, coeffs, x)
        .into_iter()
        .filter(|&(_, c, _)| c != 0.0)
        .map(|(i, c, psi)| multiplier(model, omega, part, i) * c * psi)
        .sum()
}

/// `sum_I <f, psi_I>^2 psi_I(x)^2`, the denominator of the pointwise
/// concentration bound.
pub fn pointwise_square_mass(w: &WaveletFamily, coeffs: &WaveletCoefficients, x: f64) -> f64 {
    pointwise_terms(w, coeffs, x)
        .into_iter()
        .map(|(_, c, psi)| (c * psi).powi(2))
        .sum()
}

/// Exact `E |T f(x) - E T f(x)|^2 = sum_I Var(a_I) <f, psi_I>^2 psi_I(x)^2`.
pub fn pointwise_centered_variance(
    w: &WaveletFamily,
    coeffs: &WaveletCoefficients,
    model: &CoefficientModel,
    x: f64,
) -> f64 {
    model.variance() * pointwise_square_mass(w, coeffs, x)
}

/// Estimate of `|||T f|||_2 = (int E |T f(x)|^2 dx)^(1/2)` with its exact
/// value (Haar) and the certified bound `(sqrt(8 nu) + sum |E a_I|) ||f||_2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorNormReport {
    pub estimate: McEstimate,
    pub exact: Option<f64>,
    pub certified_bound: f64,
    pub f_l2: f64,
}

impl VectorNormReport {
    /// Estimate within the certified bound up to `slack` CI half-widths.
    pub fn within_bound(&self, slack: f64) -> bool {
        self.estimate.mean <= self.certified_bound + slack * self.estimate.half_width()
    }
}

/// Certified operator constant `sqrt(8 nu) + sum_I |E a_I|`.
pub fn certified_operator_constant(model: &CoefficientModel) -> f64 {
    (8.0 * model.nu()).sqrt() + model.mean_profile_l1()
}

pub fn vector_norm_t(
    w: &WaveletFamily,
    model: &CoefficientModel,
    f: &GridFunction,
    job: &KernelJob,
    n: u64,
    seed: u64,
    confidence: f64,
) -> Result<VectorNormReport> {
    if n < 1000 {
        return Err(Error::invalid(format!(
            "operator norm estimate needs n >= 1000, got {n}"
        )));
    }
    model.validate()?;
    let coeffs = analyze(w, f, job)?;
    let second = mc_mean(n, confidence, |r| {
        realize(w, &coeffs, model, &Realization::new(seed, r), Part::Full)
            .l2_norm()
            .powi(2)
    });
    // Kept Haar wavelets are orthonormal on the grid.
    let exact = w.is_haar().then(|| {
        coeffs
            .iter()
            .map(|(i, c)| (model.mean_at(i).powi(2) + model.variance()) * c * c)
            .sum::<f64>()
            .sqrt()
    });
    let f_l2 = f.l2_norm();
    Ok(VectorNormReport {
        estimate: second.sqrt(),
        exact,
        certified_bound: certified_operator_constant(model) * f_l2,
        f_l2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weak11Row {
    pub lambda: f64,
    /// `|{x : ||T f(x)||_{L2(Omega)} > lambda}|`
    pub measure: f64,
    /// `lambda * measure / ||f||_1`
    pub normalized_product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weak11Profile {
    pub f_l1: f64,
    pub rows: Vec<Weak11Row>,
    /// `max lambda |{...}| / ||f||_1` over the thresholds.
    pub fitted_c: f64,
    pub max_pointwise_norm: f64,
}

/// Weak-type profile of `x -> ||T f(x)||_{L2(Omega)}` estimated from `n`
/// realizations; thresholds are `lambda = tau ||f||_1` for each `tau`.
#[allow(clippy::too_many_arguments)]
pub fn weak11_profile(
    w: &WaveletFamily,
    model: &CoefficientModel,
    f: &GridFunction,
    job: &KernelJob,
    n: u64,
    seed: u64,
    relative_thresholds: &[f64],
) -> Result<Weak11Profile> {
    if n == 0 {
        return Err(Error::invalid(
            "weak-type profile needs at least one realization",
        ));
    }
    if relative_thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("thresholds must be positive"));
    }
    model.validate()?;
    let coeffs = analyze(w, f, job)?;
    let sums = par_chunked(
        n,
        || vec![0.0; f.len()],
        |acc, r| {
            let tf = realize(w, &coeffs, model, &Realization::new(seed, r), Part::Full);
            for (a, v) in acc.iter_mut().zip(tf.samples()) {
                *a += v * v;
            }
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    );
    let norms: Vec<f64> = sums.iter().map(|s| (s / n as f64).sqrt()).collect();
    let f_l1 = f.l1_norm();
    let h = f.step();
    let rows: Vec<Weak11Row> = relative_thresholds
        .iter()
        .map(|&tau| {
            let lambda = tau * f_l1;
            let measure = h * norms.iter().filter(|&&v| v > lambda).count() as f64;
            let normalized_product = if f_l1 > 0.0 {
                lambda * measure / f_l1
            } else {
                0.0
            };
            Weak11Row {
                lambda,
                measure,
                normalized_product,
            }
        })
        .collect();
    Ok(Weak11Profile {
        f_l1,
        fitted_c: rows
            .iter()
            .map(|r| r.normalized_product)
            .fold(0.0, f64::max),
        max_pointwise_norm: norms.iter().copied().fold(0.0, f64::max),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bumpy() -> GridFunction {
        GridFunction::from_fn(0, 8, |x| (7.0 * x).sin() + 0.3 * (31.0 * x).cos()).unwrap()
    }

    #[test]
    fn all_ones_model_projects() {
        let h = WaveletFamily::haar();
        let f = bumpy();
        let job = KernelJob::default();
        let tf = apply_t(
            &h,
            &CoefficientModel::constant(1.0),
            &f,
            &job,
            &Realization::new(0, 0),
        )
        .unwrap();
        let p = project(&h, &analyze(&h, &f, &job).unwrap());
        assert_eq!(tf, p);
    }

    #[test]
    fn rademacher_preserves_norm() {
        let h = WaveletFamily::haar();
        let f = bumpy();
        let job = KernelJob::default();
        let p = project(&h, &analyze(&h, &f, &job).unwrap());
        for r in 0..5 {
            let tf = apply_t(
                &h,
                &CoefficientModel::rademacher(),
                &f,
                &job,
                &Realization::new(3, r),
            )
            .unwrap();
            assert!((tf.l2_norm() - p.l2_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_and_deterministic() {
        let h = WaveletFamily::haar();
        let m = CoefficientModel::gaussian(1.0);
        let job = KernelJob::default();
        let omega = Realization::new(5, 1);
        let f = bumpy();
        let g = GridFunction::from_fn(0, 8, |x| x * x).unwrap();
        let sum = GridFunction::new(
            0,
            8,
            f.samples()
                .iter()
                .zip(g.samples())
                .map(|(a, b)| 2.0 * a - b)
                .collect(),
        )
        .unwrap();
        let (tf, tg, ts) = (
            apply_t(&h, &m, &f, &job, &omega).unwrap(),
            apply_t(&h, &m, &g, &job, &omega).unwrap(),
            apply_t(&h, &m, &sum, &job, &omega).unwrap(),
        );
        for i in 0..f.len() {
            let lin = 2.0 * tf.samples()[i] - tg.samples()[i];
            assert!((lin - ts.samples()[i]).abs() < 1e-12);
        }
        assert_eq!(tf, apply_t(&h, &m, &f, &job, &omega).unwrap());
    }

    #[test]
    fn zero_function() {
        let h = WaveletFamily::haar();
        let z = GridFunction::zeros(0, 6).unwrap();
        let m = CoefficientModel::gaussian(1.0);
        let r = vector_norm_t(&h, &m, &z, &KernelJob::default(), 1000, 0, 0.99).unwrap();
        assert_eq!(r.estimate.mean, 0.0);
        let p = weak11_profile(&h, &m, &z, &KernelJob::default(), 10, 0, &[0.1, 1.0]).unwrap();
        assert!(p.rows.iter().all(|r| r.measure == 0.0));
    }

    #[test]
    fn pointwise_sampling_matches_grid() {
        let h = WaveletFamily::haar();
        let m = CoefficientModel::gaussian(2.0);
        let f = bumpy();
        let coeffs = analyze(&h, &f, &KernelJob::default()).unwrap();
        let omega = Realization::new(8, 8);
        let tf = realize(&h, &coeffs, &m, &omega, Part::Centered);
        for i in [3, 100, 255] {
            let v = sample_operator_at(&h, &coeffs, &m, f.x(i), &omega, Part::Centered);
            assert!((v - tf.samples()[i]).abs() < 1e-12);
        }
    }
}
