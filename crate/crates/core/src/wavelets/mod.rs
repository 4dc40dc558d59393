//! Evaluable wavelet families.
//!
//! Two families are provided: the Haar wavelet, evaluated exactly, and a
//! tabulated smooth wavelet (Meyer by default) satisfying the decay condition
//! `|psi(x)| + |psi'(x)| <= C (1 + |x|)^(-1 - eps)` with fitted constants.
//!
//! [`WaveletFamily::expand_pair`] enumerates the terms `psi_I(x) psi_I(y)` of
//! the summability series that a [`KernelJob`] keeps, together with enough
//! structure to bound the omitted ones. Every series in the crate (kernels,
//! square sums, three-series certificates) is built on that enumeration.

pub mod meyer;
pub mod table;

use std::sync::{Arc, OnceLock};

use crate::dyadic::{pow2, smallest_common, DyadicIndex, DyadicPoint};
use crate::error::{Error, Result};
use crate::randkernel::KernelJob;

pub use table::{DecayCertificate, TabulatedWavelet};

/// Default half-width of the Meyer table.
pub const MEYER_RADIUS: u32 = 32;
/// Default Meyer table spacing is `2^-MEYER_LOG2_INV_STEP`.
pub const MEYER_LOG2_INV_STEP: u32 = 10;
/// Orthonormality tolerance enforced when a smooth table is loaded.
pub const SMOOTH_ORTHO_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum WaveletFamily {
    Haar,
    Smooth(Arc<TabulatedWavelet>),
}

impl WaveletFamily {
    pub fn haar() -> Self {
        WaveletFamily::Haar
    }

    /// The default Meyer table, synthesized once per process.
    pub fn meyer() -> Self {
        static TABLE: OnceLock<Arc<TabulatedWavelet>> = OnceLock::new();
        let table =
            TABLE.get_or_init(|| Arc::new(meyer::tabulate(MEYER_RADIUS, MEYER_LOG2_INV_STEP)));
        WaveletFamily::Smooth(Arc::clone(table))
    }

    /// Wraps a loaded table after checking approximate orthonormality.
    pub fn from_table(table: TabulatedWavelet) -> Result<Self> {
        let family = WaveletFamily::Smooth(Arc::new(table));
        let defect = family.orthonormality_defect();
        if defect > SMOOTH_ORTHO_TOL {
            return Err(Error::invalid(format!(
                "wavelet table is not orthonormal: defect {defect:.3e} > {SMOOTH_ORTHO_TOL:e}"
            )));
        }
        Ok(family)
    }

    pub fn name(&self) -> &str {
        match self {
            WaveletFamily::Haar => "haar",
            WaveletFamily::Smooth(t) => t.name(),
        }
    }

    pub fn is_haar(&self) -> bool {
        matches!(self, WaveletFamily::Haar)
    }

    pub fn has_derivative(&self) -> bool {
        !self.is_haar()
    }

    pub fn table(&self) -> Option<&TabulatedWavelet> {
        match self {
            WaveletFamily::Haar => None,
            WaveletFamily::Smooth(t) => Some(t),
        }
    }

    /// Decay constants `(C, eps)`.
    pub fn decay(&self) -> (f64, f64) {
        match self {
            // |psi| = 1 on [0, 1) and (1 + x)^2 < 4 there.
            WaveletFamily::Haar => (4.0, 1.0),
            WaveletFamily::Smooth(t) => (t.certificate().c, t.certificate().eps),
        }
    }

    /// Mother wavelet value.
    #[inline]
    pub fn eval_psi(&self, x: f64) -> f64 {
        match self {
            WaveletFamily::Haar => {
                if (0.0..0.5).contains(&x) {
                    1.0
                } else if (0.5..1.0).contains(&x) {
                    -1.0
                } else {
                    0.0
                }
            }
            WaveletFamily::Smooth(t) => t.eval(x),
        }
    }

    /// `psi_I(x) = 2^(j/2) psi(2^j x - k)`.
    #[inline]
    pub fn eval_psi_i(&self, i: DyadicIndex, x: f64) -> f64 {
        let scale = pow2(i.j);
        scale.sqrt() * self.eval_psi(scale * x - i.k as f64)
    }

    /// `d/dx psi_I(x) = 2^(3j/2) psi'(2^j x - k)`.
    #[inline]
    pub fn eval_dpsi_i(&self, i: DyadicIndex, x: f64) -> Result<f64> {
        match self {
            WaveletFamily::Haar => Err(Error::DerivativeUnavailable("haar")),
            WaveletFamily::Smooth(t) => {
                let scale = pow2(i.j);
                Ok(scale * scale.sqrt() * t.eval_deriv(scale * x - i.k as f64))
            }
        }
    }

    /// Largest deviation of the Gram matrix from the identity over the
    /// indices `j, k in {-1, 0, 1}`.
    pub fn orthonormality_defect(&self) -> f64 {
        let indices: Vec<DyadicIndex> = (-1..=1)
            .flat_map(|j| (-1..=1).map(move |k| DyadicIndex::new(j, k)))
            .collect();
        match self {
            WaveletFamily::Haar => {
                // Piecewise constant on the 2^-2 grid: midpoint sums are exact.
                let h = 0.25;
                let samples = |i: DyadicIndex| -> Vec<f64> {
                    (-16..16)
                        .map(|n| self.eval_psi_i(i, (n as f64 + 0.5) * h))
                        .collect()
                };
                gram_defect(&indices, samples, h)
            }
            WaveletFamily::Smooth(t) => {
                // The integrands are band limited far below the Nyquist rate
                // of this grid, so the trapezoid rule is spectrally accurate.
                let half = 2.0 * (t.radius() + 2.0);
                let h = 1.0 / 128.0;
                let n = (2.0 * half / h) as i64;
                let samples = |i: DyadicIndex| -> Vec<f64> {
                    (0..=n)
                        .map(|m| self.eval_psi_i(i, -half + m as f64 * h))
                        .collect()
                };
                gram_defect(&indices, samples, h)
            }
        }
    }

    /// Enumerates the terms of `sum_I psi_I(x) psi_I(y)` kept by `job`.
    ///
    /// For Haar only the ancestors of the smallest common dyadic interval
    /// contribute; for a smooth table every scale in the job's range is
    /// scanned over the translations where both factors are nonzero, so the
    /// translation windows are exact and only whole scales are omitted.
    pub fn expand_pair(
        &self,
        x: f64,
        y: f64,
        job: &KernelJob,
        with_derivative: bool,
    ) -> Result<PairExpansion> {
        job.validate()?;
        if x == y {
            return Err(Error::DegeneratePair);
        }
        match self {
            WaveletFamily::Haar => {
                if with_derivative {
                    return Err(Error::DerivativeUnavailable("haar"));
                }
                expand_haar(x, y, job)
            }
            WaveletFamily::Smooth(t) => Ok(expand_smooth(t, x, y, job, with_derivative)),
        }
    }
}

fn gram_defect(indices: &[DyadicIndex], samples: impl Fn(DyadicIndex) -> Vec<f64>, h: f64) -> f64 {
    let sampled: Vec<Vec<f64>> = indices.iter().map(|&i| samples(i)).collect();
    let mut defect: f64 = 0.0;
    for a in 0..sampled.len() {
        for b in a..sampled.len() {
            let ip: f64 = sampled[a]
                .iter()
                .zip(&sampled[b])
                .map(|(p, q)| p * q)
                .sum::<f64>()
                * h;
            let target = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((ip - target).abs());
        }
    }
    defect
}

/// One kept term of a pair expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub index: DyadicIndex,
    /// `psi_I(x)`.
    pub at_x: f64,
    /// `psi_I(y)`.
    pub at_y: f64,
    /// `d/dx psi_I(x)`, zero unless requested.
    pub dx: f64,
    /// `psi_I(x) psi_I(y)`; exact for Haar, where it is `+-2^j` or zero.
    pub prod: f64,
}

impl Term {
    #[inline]
    pub fn product(&self) -> f64 {
        self.prod
    }

    #[inline]
    pub fn grad_product(&self) -> f64 {
        self.dx * self.at_y
    }
}

/// Which omitted mass a tail bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `sum |psi_I(x)| |psi_I(y)|`
    Abs,
    /// `sum |psi_I(x)|^2 |psi_I(y)|^2`
    Square,
    /// `sum |d psi_I(x)| |psi_I(y)|`
    GradAbs,
    /// `sum |d psi_I(x)|^2 |psi_I(y)|^2`
    GradSquare,
}

#[derive(Clone, Debug)]
pub struct PairExpansion {
    pub terms: Vec<Term>,
    pub(crate) omitted: Omitted,
}

#[derive(Clone, Debug)]
pub(crate) enum Omitted {
    /// Ancestors `I^l` of `I(x, y)`; level `l` has `|psi psi| = 2^(j0 - l)`.
    Haar {
        /// Scale of `I(x, y)`.
        j0: i32,
        /// The common interval itself.
        root: DyadicIndex,
        /// Signed products of ancestors finer than the job's range.
        fine: Vec<(DyadicIndex, f64)>,
        /// First omitted coarse level.
        coarse_from: u32,
    },
    Smooth {
        scale_min: i32,
        fine_covered: bool,
        cert: DecayCertificate,
    },
}

impl PairExpansion {
    /// Certified bound on the omitted part of the series `q`.
    ///
    /// Haar values are exact (closed-form geometric remainders). Smooth
    /// values bound each omitted coarse scale by a periodized sum; omitted
    /// fine scales are empty when the support radius forces it, and are
    /// reported as an infinite bound otherwise.
    pub fn omitted_bound(&self, q: Quantity) -> f64 {
        match &self.omitted {
            Omitted::Haar {
                j0,
                fine,
                coarse_from,
                ..
            } => {
                let p = match q {
                    Quantity::Abs => 1,
                    Quantity::Square => 2,
                    Quantity::GradAbs | Quantity::GradSquare => return f64::INFINITY,
                };
                let fine_sum: f64 = fine.iter().map(|(_, c)| c.abs().powi(p)).sum();
                let first = pow2(p * (j0 - *coarse_from as i32));
                fine_sum + first / (1.0 - pow2(-p))
            }
            Omitted::Smooth {
                scale_min,
                fine_covered,
                cert,
            } => {
                if !fine_covered {
                    return f64::INFINITY;
                }
                let jm = *scale_min;
                match q {
                    Quantity::Abs => pow2(jm) * cert.sup_psi * cert.periodized_abs,
                    Quantity::Square => {
                        pow2(2 * jm) / 3.0 * cert.sup_psi.powi(2) * cert.periodized_sq
                    }
                    Quantity::GradAbs => pow2(2 * jm) / 3.0 * cert.sup_dpsi * cert.periodized_abs,
                    Quantity::GradSquare => {
                        pow2(4 * jm) / 15.0 * cert.sup_dpsi.powi(2) * cert.periodized_sq
                    }
                }
            }
        }
    }

    /// Bound on `sum_{omitted I} 2 exp(-A^2 / (2 nu |psi_I(x) psi_I(y)|^2))`,
    /// the Chernoff bound on the omitted terms of the first three-series sum.
    pub fn omitted_chernoff(&self, a: f64, nu: f64) -> f64 {
        if nu == 0.0 {
            return 0.0;
        }
        let chernoff = |c: f64| 2.0 * (-(a * a) / (2.0 * nu * c * c)).exp();
        // sum_m e^{-E 4^m} <= e^{-E} / (1 - e^{-3E}) since 4^m - 1 >= 3m.
        let dominated = |e0: f64| (-e0).exp() / (1.0 - (-3.0 * e0).exp());
        match &self.omitted {
            Omitted::Haar {
                j0,
                fine,
                coarse_from,
                ..
            } => {
                let fine_sum: f64 = fine.iter().map(|&(_, c)| chernoff(c)).sum();
                let c0 = pow2(j0 - *coarse_from as i32);
                fine_sum + 2.0 * dominated(a * a / (2.0 * nu * c0 * c0))
            }
            Omitted::Smooth {
                scale_min,
                fine_covered,
                cert,
            } => {
                if !fine_covered {
                    return f64::INFINITY;
                }
                let shifts = 2.0 * cert.radius + 1.0;
                let c0 = pow2(scale_min - 1) * cert.sup_psi.powi(2);
                shifts * 2.0 * dominated(a * a / (2.0 * nu * c0 * c0))
            }
        }
    }

    /// `true` when no nonzero term lies at a scale finer than the kept range.
    pub fn fine_tail_is_empty(&self) -> bool {
        match &self.omitted {
            Omitted::Haar { fine, .. } => fine.is_empty(),
            Omitted::Smooth { fine_covered, .. } => *fine_covered,
        }
    }

    /// Smallest common dyadic interval (Haar only).
    pub fn common_interval(&self) -> Option<DyadicIndex> {
        match &self.omitted {
            Omitted::Haar { root, .. } => Some(*root),
            Omitted::Smooth { .. } => None,
        }
    }
}

/// Exact conversion of a float in `R+` to a dyadic rational.
pub(crate) fn exact_point(x: f64) -> Result<DyadicPoint> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::invalid(format!("Haar kernels live on R+; got {x}")));
    }
    for depth in 0..=crate::dyadic::MAX_DEPTH {
        if let Ok(p) = DyadicPoint::from_f64(x, depth) {
            return Ok(p);
        }
    }
    Err(Error::invalid(format!(
        "{x} needs more than {} binary digits",
        crate::dyadic::MAX_DEPTH
    )))
}

/// `psi_I(x)` for Haar, decided exactly from the dyadic expansion of `x`.
pub(crate) fn haar_value(i: DyadicIndex, x: DyadicPoint) -> f64 {
    match i.half_of(x) {
        Some(0) => pow2(i.j).sqrt(),
        Some(_) => -pow2(i.j).sqrt(),
        None => 0.0,
    }
}

fn expand_haar(x: f64, y: f64, job: &KernelJob) -> Result<PairExpansion> {
    let (px, py) = (exact_point(x)?, exact_point(y)?);
    let root = smallest_common(px, py)?;
    let j0 = root.j;
    let mut terms = Vec::new();
    let mut fine = Vec::new();
    let mut level: u32 = 0;
    let mut cur = root;
    while cur.j >= job.scale_min {
        let (vx, vy) = (haar_value(cur, px), haar_value(cur, py));
        let prod = if (vx > 0.0) == (vy > 0.0) {
            pow2(cur.j)
        } else {
            -pow2(cur.j)
        };
        if cur.j > job.scale_max {
            fine.push((cur, prod));
        } else {
            terms.push(Term {
                index: cur,
                at_x: vx,
                at_y: vy,
                dx: 0.0,
                prod,
            });
        }
        cur = cur.parent();
        level += 1;
    }
    Ok(PairExpansion {
        terms,
        omitted: Omitted::Haar {
            j0,
            root,
            fine,
            coarse_from: level,
        },
    })
}

fn expand_smooth(
    t: &TabulatedWavelet,
    x: f64,
    y: f64,
    job: &KernelJob,
    with_derivative: bool,
) -> PairExpansion {
    let r = t.radius();
    let mut terms = Vec::new();
    for j in job.scale_min..=job.scale_max {
        let scale = pow2(j);
        let (u, v) = (scale * x, scale * y);
        let k_lo = (u.max(v) - r).floor() as i64 + 1;
        let k_hi = (u.min(v) + r).ceil() as i64 - 1;
        if k_lo > k_hi {
            continue;
        }
        let amp = scale.sqrt();
        for k in k_lo..=k_hi {
            let ux = u - k as f64;
            let at_x = amp * t.eval(ux);
            let at_y = amp * t.eval(v - k as f64);
            if at_x == 0.0 && at_y == 0.0 {
                continue;
            }
            let dx = if with_derivative {
                scale * amp * t.eval_deriv(ux)
            } else {
                0.0
            };
            terms.push(Term {
                index: DyadicIndex::new(j, k),
                at_x,
                at_y,
                dx,
                prod: at_x * at_y,
            });
        }
    }
    let fine_covered = pow2(job.scale_max + 1) * (x - y).abs() >= 2.0 * r;
    PairExpansion {
        terms,
        omitted: Omitted::Smooth {
            scale_min: job.scale_min,
            fine_covered,
            cert: *t.certificate(),
        },
    }
}

/// Truncated `sum |psi_I(x)| |psi_I(y)|` and a certified bound on the rest.
///
/// The Haar remainder is added back in closed form, so the Haar sum is the
/// full series and its bound is zero.
pub fn summability_size(w: &WaveletFamily, x: f64, y: f64, job: &KernelJob) -> Result<(f64, f64)> {
    let exp = w.expand_pair(x, y, job, false)?;
    let sum: f64 = exp.terms.iter().map(|t| t.product().abs()).sum();
    let tail = exp.omitted_bound(Quantity::Abs);
    if w.is_haar() {
        Ok((sum + tail, 0.0))
    } else {
        Ok((sum, tail))
    }
}

/// Truncated `sum |d/dx psi_I(x)| |psi_I(y)|` and a certified tail bound.
pub fn summability_grad(w: &WaveletFamily, x: f64, y: f64, job: &KernelJob) -> Result<(f64, f64)> {
    if !w.has_derivative() {
        return Err(Error::DerivativeUnavailable("haar"));
    }
    let exp = w.expand_pair(x, y, job, true)?;
    let sum: f64 = exp.terms.iter().map(|t| t.grad_product().abs()).sum();
    Ok((sum, exp.omitted_bound(Quantity::GradAbs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_mother_values() {
        let h = WaveletFamily::haar();
        assert_eq!(h.eval_psi(0.25), 1.0);
        assert_eq!(h.eval_psi(0.75), -1.0);
        assert_eq!(h.eval_psi(2.0), 0.0);
        assert_eq!(h.eval_psi(0.5), -1.0);
        assert_eq!(h.eval_psi(1.0), 0.0);
    }

    #[test]
    fn haar_scaled_values() {
        let h = WaveletFamily::haar();
        let i = DyadicIndex::new(1, 0);
        assert_eq!(h.eval_psi_i(i, 0.1), 2f64.sqrt());
        assert_eq!(h.eval_psi_i(i, 0.4), -2f64.sqrt());
        assert_eq!(h.eval_psi_i(DyadicIndex::new(0, 0), 0.3), h.eval_psi(0.3));
        assert!(matches!(
            h.eval_dpsi_i(i, 0.1),
            Err(Error::DerivativeUnavailable(_))
        ));
    }

    #[test]
    fn haar_is_orthonormal() {
        assert!(WaveletFamily::haar().orthonormality_defect() < 1e-15);
    }

    #[test]
    fn haar_summability_at_quarter_points() {
        let job = KernelJob::default();
        let (sum, tail) = summability_size(&WaveletFamily::haar(), 0.25, 0.75, &job).unwrap();
        assert_eq!(sum, 2.0);
        assert_eq!(tail, 0.0);
        assert!(matches!(
            summability_size(&WaveletFamily::haar(), 0.5, 0.5, &job),
            Err(Error::DegeneratePair)
        ));
        assert!(summability_grad(&WaveletFamily::haar(), 0.25, 0.75, &job).is_err());
    }

    #[test]
    fn haar_terms_follow_the_ancestor_chain() {
        let job = KernelJob {
            scale_min: -3,
            scale_max: 10,
            ..KernelJob::default()
        };
        let exp = WaveletFamily::haar()
            .expand_pair(0.125, 0.375, &job, false)
            .unwrap();
        let idx: Vec<_> = exp.terms.iter().map(|t| t.index).collect();
        assert_eq!(idx, DyadicIndex::new(1, 0).ancestors(4));
        // Opposite halves at the root, same half above it.
        assert_eq!(exp.terms[0].product(), -2.0);
        assert_eq!(exp.terms[1].product(), 1.0);
        assert_eq!(exp.terms[4].product(), 0.125);
    }

    #[test]
    fn haar_fine_scales_outside_the_range_are_tracked() {
        let job = KernelJob {
            scale_min: -4,
            scale_max: 1,
            ..KernelJob::default()
        };
        // I(x, y) = [0, 1/8), scale 3: levels 0 and 1 are finer than the range.
        let exp = WaveletFamily::haar()
            .expand_pair(0.03125, 0.09375, &job, false)
            .unwrap();
        assert!(!exp.fine_tail_is_empty());
        assert_eq!(exp.terms.first().unwrap().index, DyadicIndex::new(1, 0));
        let omitted_sq = exp.omitted_bound(Quantity::Square);
        let kept_sq: f64 = exp.terms.iter().map(|t| t.product().powi(2)).sum();
        assert!((omitted_sq + kept_sq - 4.0 / 3.0 * 64.0).abs() < 1e-12);
    }
}
