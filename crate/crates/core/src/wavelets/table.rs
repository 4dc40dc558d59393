//! Tabulated smooth wavelets and their on-disk format.
//!
//! A table holds samples of `psi` and `psi'` on a uniform grid that starts at
//! an integer `-R`. Evaluation uses cubic Hermite interpolation (values and
//! slopes), which makes the interpolant `C^1`; outside `(-R, R)` the wavelet
//! is exactly zero.
//!
//! Text format, version 1:
//!
//! ```text
//! wavesum-wavelet-table 1
//! name <identifier>
//! start <float>
//! step <float>
//! count <integer>
//! <psi_0> <dpsi_0>
//! ...
//! ```
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "wavesum-wavelet-table";
const VERSION: u32 = 1;

/// Derived bounds that every tail estimate relies on.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DecayCertificate {
    /// `|psi(x)| + |psi'(x)| <= c (1 + |x|)^(-1 - eps)`.
    pub c: f64,
    pub eps: f64,
    /// Upper bound on `sup |psi|`.
    pub sup_psi: f64,
    /// Upper bound on `sup |psi'|`.
    pub sup_dpsi: f64,
    /// Upper bound on `sup_u sum_k |psi(u - k)|`.
    pub periodized_abs: f64,
    /// Upper bound on `sup_u sum_k psi(u - k)^2`.
    pub periodized_sq: f64,
    /// Half-width `R` of the support.
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct TabulatedWavelet {
    name: String,
    start: f64,
    step: f64,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    certificate: DecayCertificate,
}

impl TabulatedWavelet {
    pub fn from_samples(
        name: &str,
        start: f64,
        step: f64,
        psi: Vec<f64>,
        dpsi: Vec<f64>,
    ) -> Result<Self> {
        if psi.len() != dpsi.len() || psi.len() < 3 {
            return Err(Error::Format {
                kind: "wavelet table",
                reason: "psi and dpsi must have the same length (at least 3)".into(),
            });
        }
        if !(step > 0.0) || start.fract() != 0.0 || start >= 0.0 {
            return Err(Error::Format {
                kind: "wavelet table",
                reason: "grid must start at a negative integer with positive step".into(),
            });
        }
        let per_unit = 1.0 / step;
        if per_unit.fract() != 0.0 {
            return Err(Error::Format {
                kind: "wavelet table",
                reason: "step must divide 1".into(),
            });
        }
        let end = start + step * (psi.len() - 1) as f64;
        if end != -start {
            return Err(Error::Format {
                kind: "wavelet table",
                reason: format!("grid must be symmetric, got [{start}, {end}]"),
            });
        }
        if psi.iter().chain(&dpsi).any(|v| !v.is_finite()) {
            return Err(Error::Format {
                kind: "wavelet table",
                reason: "non-finite sample".into(),
            });
        }
        let mut table = TabulatedWavelet {
            name: name.to_string(),
            start,
            step,
            psi,
            dpsi,
            certificate: DecayCertificate {
                c: 0.0,
                eps: 1.0,
                sup_psi: 0.0,
                sup_dpsi: 0.0,
                periodized_abs: 0.0,
                periodized_sq: 0.0,
                radius: -start,
            },
        };
        table.certificate = table.fit_certificate();
        Ok(table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self) -> f64 {
        -self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn certificate(&self) -> &DecayCertificate {
        &self.certificate
    }

    pub fn sample_points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.psi.len()).map(move |i| (self.knot(i), self.psi[i], self.dpsi[i]))
    }

    fn knot(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Cell index and local coordinate in `[0, 1)`, or `None` outside the support.
    #[inline]
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let r = self.radius();
        if !(x > -r && x < r) {
            return None;
        }
        let pos = (x - self.start) / self.step;
        let i = (pos.floor() as usize).min(self.psi.len() - 2);
        Some((i, pos - i as f64))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let Some((i, s)) = self.locate(x) else {
            return 0.0;
        };
        let h = self.step;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.psi[i]
            + (s3 - 2.0 * s2 + s) * h * self.dpsi[i]
            + (-2.0 * s3 + 3.0 * s2) * self.psi[i + 1]
            + (s3 - s2) * h * self.dpsi[i + 1]
    }

    /// Derivative of the interpolant.
    #[inline]
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let Some((i, s)) = self.locate(x) else {
            return 0.0;
        };
        let h = self.step;
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * self.psi[i]
            + (3.0 * s2 - 4.0 * s + 1.0) * h * self.dpsi[i]
            + (-6.0 * s2 + 6.0 * s) * self.psi[i + 1]
            + (3.0 * s2 - 2.0 * s) * h * self.dpsi[i + 1])
            / h
    }

    /// Fits `c` for `eps = 1` and bounds the periodized sums.
    ///
    /// Sample maxima are inflated by mean-value margins so that the bounds
    /// hold for the interpolant between knots, not only at the knots.
    fn fit_certificate(&self) -> DecayCertificate {
        let n = self.psi.len();
        let h = self.step;
        // Second derivative of the interpolant is bounded cellwise by the
        // larger endpoint value of the piecewise-linear s'' in each cell.
        let mut sup_d2: f64 = 0.0;
        for i in 0..n - 1 {
            let (p0, p1) = (self.psi[i], self.psi[i + 1]);
            let (m0, m1) = (self.dpsi[i] * h, self.dpsi[i + 1] * h);
            let at0 = (-6.0 * p0 - 4.0 * m0 + 6.0 * p1 - 2.0 * m1) / (h * h);
            let at1 = (6.0 * p0 + 2.0 * m0 - 6.0 * p1 + 4.0 * m1) / (h * h);
            sup_d2 = sup_d2.max(at0.abs()).max(at1.abs());
        }
        let mut c: f64 = 0.0;
        let mut sup_psi: f64 = 0.0;
        let mut sup_dpsi: f64 = 0.0;
        for i in 0..n {
            let x = self.knot(i);
            let w = (1.0 + x.abs()).powi(2);
            c = c.max((self.psi[i].abs() + self.dpsi[i].abs()) * w);
            sup_psi = sup_psi.max(self.psi[i].abs());
            sup_dpsi = sup_dpsi.max(self.dpsi[i].abs());
            if i + 1 < n {
                let mid = x + 0.5 * h;
                let wm = (1.0 + mid.abs()).powi(2);
                c = c.max((self.eval(mid).abs() + self.eval_deriv(mid).abs()) * wm);
            }
        }
        let sup_dpsi = sup_dpsi + h * sup_d2;
        let sup_psi = sup_psi + h * sup_dpsi;
        // Between knots |f(u)| <= |f(knot)| + h sup|f'|; sums over the
        // 2R + 1 integer shifts that can be nonzero.
        let per_unit = (1.0 / h).round() as usize;
        let shifts = (2.0 * self.radius()) as usize + 1;
        let mut per_abs: f64 = 0.0;
        let mut per_sq: f64 = 0.0;
        for offset in 0..per_unit {
            let (mut sa, mut sq) = (0.0, 0.0);
            let mut i = offset;
            while i < n {
                sa += self.psi[i].abs();
                sq += self.psi[i] * self.psi[i];
                i += per_unit;
            }
            per_abs = per_abs.max(sa);
            per_sq = per_sq.max(sq);
        }
        let margin = shifts as f64 * h * sup_dpsi;
        DecayCertificate {
            // Interpolation between samples and midpoints: relative slack.
            c: c * (1.0 + 1e-6),
            eps: 1.0,
            sup_psi,
            sup_dpsi,
            periodized_abs: per_abs + margin,
            periodized_sq: per_sq + 2.0 * sup_psi * margin,
            radius: self.radius(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.psi.len() * 48);
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "start {:?}", self.start);
        let _ = writeln!(out, "step {:?}", self.step);
        let _ = writeln!(out, "count {}", self.psi.len());
        for (p, d) in self.psi.iter().zip(&self.dpsi) {
            let _ = writeln!(out, "{p:?} {d:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            kind: "wavelet table",
            reason,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            [MAGIC, v] if v.parse::<u32>().ok() == Some(VERSION) => {}
            _ => return Err(bad(format!("unsupported header {header:?}"))),
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing `{key}` line")))?;
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| bad(format!("malformed line {line:?}")))?;
            if k != key {
                return Err(bad(format!("expected `{key}`, found `{k}`")));
            }
            Ok(v.trim().to_string())
        };
        let name = field("name")?;
        let start: f64 = field("start")?
            .parse()
            .map_err(|e| bad(format!("start: {e}")))?;
        let step: f64 = field("step")?
            .parse()
            .map_err(|e| bad(format!("step: {e}")))?;
        let count: usize = field("count")?
            .parse()
            .map_err(|e| bad(format!("count: {e}")))?;
        let mut psi = Vec::with_capacity(count);
        let mut dpsi = Vec::with_capacity(count);
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| bad(format!("sample {n}: missing column")))?
                    .parse()
                    .map_err(|e| bad(format!("sample {n}: {e}")))
            };
            psi.push(next()?);
            dpsi.push(next()?);
        }
        if psi.len() != count {
            return Err(bad(format!(
                "expected {count} samples, found {}",
                psi.len()
            )));
        }
        Self::from_samples(&name, start, step, psi, dpsi)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A small smooth table built from a Gaussian bump derivative.
    fn toy() -> TabulatedWavelet {
        let step = 1.0 / 64.0;
        let n = 2 * 8 * 64 + 1;
        let f = |x: f64| -x * (-x * x).exp();
        let df = |x: f64| (2.0 * x * x - 1.0) * (-x * x).exp();
        let xs: Vec<f64> = (0..n).map(|i| -8.0 + i as f64 * step).collect();
        TabulatedWavelet::from_samples(
            "toy",
            -8.0,
            step,
            xs.iter().map(|&x| f(x)).collect(),
            xs.iter().map(|&x| df(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn hermite_reproduces_smooth_function() {
        let t = toy();
        for i in 0..200 {
            let x = -3.0 + i as f64 * 0.0301;
            let exact = -x * (-x * x).exp();
            assert!((t.eval(x) - exact).abs() < 1e-8, "x = {x}");
        }
        assert_eq!(t.eval(8.0), 0.0);
        assert_eq!(t.eval(-9.0), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let t = toy();
        let h = 1e-6;
        for i in 0..100 {
            let x = -2.5 + i as f64 * 0.0497;
            let fd = (t.eval(x + h) - t.eval(x - h)) / (2.0 * h);
            assert!((t.eval_deriv(x) - fd).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn certificate_dominates_samples() {
        let t = toy();
        let cert = *t.certificate();
        for (x, p, d) in t.sample_points() {
            assert!(p.abs() + d.abs() <= cert.c * (1.0 + x.abs()).powi(2));
        }
        assert!(cert.sup_psi >= 0.5f64.sqrt() * (-0.5f64).exp());
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let t = toy();
        let back = TabulatedWavelet::from_text(&t.to_text()).unwrap();
        assert_eq!(back.psi, t.psi);
        assert_eq!(back.dpsi, t.dpsi);
        assert_eq!(back.start, t.start);
        assert_eq!(back.step, t.step);
        assert_eq!(back.name(), "toy");
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(TabulatedWavelet::from_text("").is_err());
        assert!(TabulatedWavelet::from_text("wavesum-wavelet-table 9\n").is_err());
        let t = toy().to_text();
        let truncated: String = t.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(TabulatedWavelet::from_text(&truncated).is_err());
    }
}
