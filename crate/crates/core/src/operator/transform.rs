//! Wavelet analysis and synthesis of grid functions.

use std::f64::consts::FRAC_1_SQRT_2;

use super::grid::GridFunction;
use crate::dyadic::{pow2, DyadicIndex};
use crate::error::{Error, Result};
use crate::randkernel::KernelJob;
use crate::wavelets::{TabulatedWavelet, WaveletFamily};

/// Finest smooth scale is `J - SMOOTH_GUARD`, keeping at least `2^SMOOTH_GUARD`
/// cells per unit of the mother wavelet in every quadrature.
pub const SMOOTH_GUARD: u32 = 3;

/// Coefficients of one scale, for translations `k_lo, k_lo + 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub j: i32,
    pub k_lo: i64,
    pub values: Vec<f64>,
}

impl Level {
    pub fn iter(&self) -> impl Iterator<Item = (DyadicIndex, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(n, &c)| (DyadicIndex::new(self.j, self.k_lo + n as i64), c))
    }
}

/// `<f, psi_I>` for every `I` in the effective scale range of a grid.
#[derive(Clone, Debug)]
pub struct WaveletCoefficients {
    extent_log2: u32,
    depth: u32,
    levels: Vec<Level>,
    /// Haar scaling coefficients at the coarsest analyzed scale.
    approximation: Vec<f64>,
    /// Haar: energy below the range (the approximation) and above it.
    pub(crate) residual_energy: Option<(f64, f64)>,
}

impl WaveletCoefficients {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Scales actually present, `(coarsest, finest)`.
    pub fn scale_range(&self) -> Option<(i32, i32)> {
        Some((self.levels.first()?.j, self.levels.last()?.j))
    }

    pub fn get(&self, i: DyadicIndex) -> f64 {
        self.levels
            .iter()
            .find(|l| l.j == i.j)
            .and_then(|l| {
                let n = i.k - l.k_lo;
                (n >= 0)
                    .then(|| l.values.get(n as usize).copied())
                    .flatten()
            })
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicIndex, f64)> + '_ {
        self.levels.iter().flat_map(Level::iter)
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(|l| l.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum <f, psi_I>^2` over the kept coefficients.
    pub fn energy(&self) -> f64 {
        self.iter().map(|(_, c)| c * c).sum()
    }

    /// Haar only: energy of the scaling part below the range.
    pub fn coarse_energy(&self) -> Option<f64> {
        self.residual_energy.map(|(c, _)| c)
    }

    /// Haar only: energy of details finer than the range.
    pub fn fine_energy(&self) -> Option<f64> {
        self.residual_energy.map(|(_, f)| f)
    }

    pub fn approximation(&self) -> &[f64] {
        &self.approximation
    }

    pub fn grid(&self) -> (u32, u32) {
        (self.extent_log2, self.depth)
    }
}

/// Effective scale range for `w` on a grid, intersected with `job`.
pub fn effective_scales(w: &WaveletFamily, f: &GridFunction, job: &KernelJob) -> (i32, i32) {
    let m = f.extent_log2() as i32;
    let finest = match w {
        WaveletFamily::Haar => f.depth() as i32 - 1,
        WaveletFamily::Smooth(_) => f.depth() as i32 - SMOOTH_GUARD as i32,
    };
    (job.scale_min.max(-m), job.scale_max.min(finest))
}

/// `<f, psi_I>` over the effective scales: the Haar pyramid (exact) or
/// midpoint quadrature against the tabulated wavelet.
pub fn analyze(
    w: &WaveletFamily,
    f: &GridFunction,
    job: &KernelJob,
) -> Result<WaveletCoefficients> {
    job.validate()?;
    match w {
        WaveletFamily::Haar => Ok(haar_analyze(f, job)),
        WaveletFamily::Smooth(t) => smooth_analyze(w, t, f, job),
    }
}

fn haar_analyze(f: &GridFunction, job: &KernelJob) -> WaveletCoefficients {
    let (lo, hi) = effective_scales(&WaveletFamily::Haar, f, job);
    let top = f.depth() as i32;
    let stop = lo.min(top);
    let root_h = f.step().sqrt();
    let mut cur: Vec<f64> = f.samples().iter().map(|s| s * root_h).collect();
    let mut levels = Vec::new();
    let mut fine = 0.0;
    for j in (stop..top).rev() {
        let half = cur.len() / 2;
        let mut approx = Vec::with_capacity(half);
        let mut detail = Vec::with_capacity(half);
        for pair in cur.chunks_exact(2) {
            approx.push((pair[0] + pair[1]) * FRAC_1_SQRT_2);
            detail.push((pair[0] - pair[1]) * FRAC_1_SQRT_2);
        }
        if j <= hi {
            levels.push(Level {
                j,
                k_lo: 0,
                values: detail,
            });
        } else {
            fine += detail.iter().map(|d| d * d).sum::<f64>();
        }
        cur = approx;
    }
    levels.reverse();
    let coarse = cur.iter().map(|a| a * a).sum();
    WaveletCoefficients {
        extent_log2: f.extent_log2(),
        depth: f.depth(),
        levels,
        approximation: cur,
        residual_energy: Some((coarse, fine)),
    }
}

/// Cells whose midpoints fall strictly inside the support of `psi_{j,k}`.
fn support_cells(t: &TabulatedWavelet, j: i32, k: i64, f: &GridFunction) -> std::ops::Range<usize> {
    let h = f.step();
    let len = pow2(-j);
    let (a, b) = ((k as f64 - t.radius()) * len, (k as f64 + t.radius()) * len);
    let first = ((a / h - 0.5).floor() + 1.0).max(0.0);
    let last = ((b / h - 0.5).ceil()).min(f.len() as f64);
    if last <= first {
        0..0
    } else {
        first as usize..last as usize
    }
}

fn smooth_translations(t: &TabulatedWavelet, j: i32, m: u32) -> (i64, i64) {
    let r = t.radius() as i64;
    let cells = (pow2(j + m as i32)).ceil() as i64;
    (1 - r, cells + r - 1)
}

fn smooth_analyze(
    w: &WaveletFamily,
    t: &TabulatedWavelet,
    f: &GridFunction,
    job: &KernelJob,
) -> Result<WaveletCoefficients> {
    let (lo, hi) = effective_scales(w, f, job);
    if lo <= hi && (hi - lo) > 40 {
        return Err(Error::invalid("smooth analysis limited to 40 scales"));
    }
    let h = f.step();
    let samples = f.samples();
    let mut levels = Vec::new();
    for j in lo..=hi {
        let (k_lo, k_hi) = smooth_translations(t, j, f.extent_log2());
        let scale = pow2(j);
        let amp = scale.sqrt();
        let values = (k_lo..=k_hi)
            .map(|k| {
                support_cells(t, j, k, f)
                    .map(|i| samples[i] * t.eval(scale * f.x(i) - k as f64))
                    .sum::<f64>()
                    * amp
                    * h
            })
            .collect();
        levels.push(Level { j, k_lo, values });
    }
    Ok(WaveletCoefficients {
        extent_log2: f.extent_log2(),
        depth: f.depth(),
        levels,
        approximation: Vec::new(),
        residual_energy: None,
    })
}

/// `sum_I mult(I, c_I) psi_I` on the grid the coefficients came from.
pub fn synthesize(
    w: &WaveletFamily,
    coeffs: &WaveletCoefficients,
    mult: impl Fn(DyadicIndex, f64) -> f64,
) -> GridFunction {
    let (m, depth) = coeffs.grid();
    let samples = match w {
        WaveletFamily::Haar => haar_synthesize(coeffs, mult),
        WaveletFamily::Smooth(t) => {
            let grid = GridFunction::zeros(m, depth).expect("grid was valid at analysis");
            smooth_synthesize(t, coeffs, &grid, mult)
        }
    };
    GridFunction::new(m, depth, samples).expect("synthesis keeps the grid")
}

fn haar_synthesize(
    coeffs: &WaveletCoefficients,
    mult: impl Fn(DyadicIndex, f64) -> f64,
) -> Vec<f64> {
    let top = coeffs.depth as i32;
    let n_top = 1usize << (coeffs.extent_log2 + coeffs.depth);
    // The scaling part is not in the span of T and starts at zero.
    let mut cur = vec![0.0; coeffs.approximation.len()];
    let mut scale = top - (n_top / cur.len()).ilog2() as i32;
    while cur.len() < n_top {
        let level = coeffs.levels.iter().find(|l| l.j == scale);
        let mut next = vec![0.0; cur.len() * 2];
        for (k, a) in cur.iter().enumerate() {
            let d = level.map_or(0.0, |l| {
                mult(DyadicIndex::new(scale, k as i64), l.values[k])
            });
            next[2 * k] = (a + d) * FRAC_1_SQRT_2;
            next[2 * k + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        cur = next;
        scale += 1;
    }
    let inv_root_h = pow2(coeffs.depth as i32).sqrt();
    cur.iter().map(|v| v * inv_root_h).collect()
}

fn smooth_synthesize(
    t: &TabulatedWavelet,
    coeffs: &WaveletCoefficients,
    grid: &GridFunction,
    mult: impl Fn(DyadicIndex, f64) -> f64,
) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for level in &coeffs.levels {
        let scale = pow2(level.j);
        let amp = scale.sqrt();
        for (i, c) in level.iter() {
            let v = mult(i, c) * amp;
            if v == 0.0 {
                continue;
            }
            for n in support_cells(t, i.j, i.k, grid) {
                out[n] += v * t.eval(scale * grid.x(n) - i.k as f64);
            }
        }
    }
    out
}

/// `(I, <f, psi_I>, psi_I(x))` for every kept `I` with `psi_I(x) != 0`.
pub fn pointwise_terms(
    w: &WaveletFamily,
    coeffs: &WaveletCoefficients,
    x: f64,
) -> Vec<(DyadicIndex, f64, f64)> {
    let mut out = Vec::new();
    for level in &coeffs.levels {
        let u = pow2(level.j) * x;
        let (k_first, k_last) = match w {
            WaveletFamily::Haar => (u.floor() as i64, u.floor() as i64),
            WaveletFamily::Smooth(t) => {
                let r = t.radius();
                ((u - r).floor() as i64 + 1, (u + r).ceil() as i64 - 1)
            }
        };
        for k in k_first.max(level.k_lo)..=k_last.min(level.k_lo + level.values.len() as i64 - 1) {
            let i = DyadicIndex::new(level.j, k);
            let psi = w.eval_psi_i(i, x);
            if psi != 0.0 {
                out.push((i, level.values[(k - level.k_lo) as usize], psi));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job() -> KernelJob {
        KernelJob::default()
    }

    #[test]
    fn haar_single_wavelet() {
        let h = WaveletFamily::haar();
        let i = DyadicIndex::new(1, 0);
        let f = GridFunction::from_fn(0, 6, |x| h.eval_psi_i(i, x)).unwrap();
        let c = analyze(&h, &f, &job()).unwrap();
        for (idx, v) in c.iter() {
            let expect = if idx == i { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-14, "{idx}: {v}");
        }
        assert_eq!(c.scale_range(), Some((0, 5)));
    }

    #[test]
    fn haar_constant_has_no_details() {
        let f = GridFunction::from_fn(0, 8, |_| 2.5).unwrap();
        let c = analyze(&WaveletFamily::haar(), &f, &job()).unwrap();
        assert!(c.iter().all(|(_, v)| v.abs() < 1e-14));
        assert!((c.coarse_energy().unwrap() - 6.25).abs() < 1e-12);
    }

    #[test]
    fn haar_parseval_and_round_trip() {
        let f = GridFunction::from_fn(2, 5, |x| (x * 1.7).sin() + (x * x).cos()).unwrap();
        let h = WaveletFamily::haar();
        let c = analyze(&h, &f, &job()).unwrap();
        let total = c.energy() + c.coarse_energy().unwrap() + c.fine_energy().unwrap();
        let norm2 = f.l2_norm().powi(2);
        assert!((total - norm2).abs() <= 1e-12 * norm2);
        // The projection removes the mean on [0, 4) only.
        let p = synthesize(&h, &c, |_, v| v);
        let mean = f.samples().iter().sum::<f64>() / f.len() as f64;
        for (a, b) in p.samples().iter().zip(f.samples()) {
            assert!((a - (b - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_restricted_range_tracks_fine_energy() {
        let f = GridFunction::from_fn(0, 6, |x| (9.0 * x).sin()).unwrap();
        let job = KernelJob {
            scale_min: 1,
            scale_max: 3,
            ..KernelJob::default()
        };
        let c = analyze(&WaveletFamily::haar(), &f, &job).unwrap();
        assert_eq!(c.scale_range(), Some((1, 3)));
        assert_eq!(c.approximation().len(), 2);
        let total = c.energy() + c.coarse_energy().unwrap() + c.fine_energy().unwrap();
        assert!((total - f.l2_norm().powi(2)).abs() < 1e-12);
        assert_eq!(c.get(DyadicIndex::new(5, 0)), 0.0);
    }

    #[test]
    fn pointwise_haar_terms_match_synthesis() {
        let h = WaveletFamily::haar();
        let f = GridFunction::from_fn(0, 6, |x| x * x - 0.3).unwrap();
        let c = analyze(&h, &f, &job()).unwrap();
        let p = synthesize(&h, &c, |_, v| v);
        for i in [0, 17, 63] {
            let v: f64 = pointwise_terms(&h, &c, f.x(i))
                .iter()
                .map(|(_, c, psi)| c * psi)
                .sum();
            assert!((v - p.samples()[i]).abs() < 1e-12);
        }
    }
}
