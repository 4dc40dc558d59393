//! Functions sampled on a uniform dyadic grid, with text and binary I/O.
//!
//! Text format:
//!
//! ```text
//! # wavesum-grid-function 1
//! # extent_log2 <m>
//! # depth <J>
//! <x> <value>
//! ...
//! ```
//!
//! with one line per cell, `x` the cell midpoint. The binary twin is the
//! magic `WSGF`, then little-endian `u32` version, `u32 m`, `u32 J`,
//! `u64` count and `count` `f64` samples.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const TEXT_HEADER: &str = "# wavesum-grid-function 1";
const MAGIC: &[u8; 4] = b"WSGF";
const BINARY_VERSION: u32 = 1;
const MAX_LOG2_LEN: u32 = 28;

/// A function on `[0, 2^m)` that is constant on each of the `2^(m + J)`
/// cells `[i 2^-J, (i + 1) 2^-J)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    extent_log2: u32,
    depth: u32,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(extent_log2: u32, depth: u32, samples: Vec<f64>) -> Result<Self> {
        if extent_log2 + depth > MAX_LOG2_LEN {
            return Err(Error::invalid(format!(
                "grid with 2^{} cells is too large",
                extent_log2 + depth
            )));
        }
        let expect = 1usize << (extent_log2 + depth);
        if samples.len() != expect {
            return Err(Error::invalid(format!(
                "grid [0, 2^{extent_log2}) at depth {depth} needs {expect} samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(GridFunction {
            extent_log2,
            depth,
            samples,
        })
    }

    pub fn zeros(extent_log2: u32, depth: u32) -> Result<Self> {
        let n = 1usize
            .checked_shl(extent_log2 + depth)
            .ok_or_else(|| Error::invalid("grid too large"))?;
        Self::new(extent_log2, depth, vec![0.0; n])
    }

    /// Samples `f` at the cell midpoints.
    pub fn from_fn(extent_log2: u32, depth: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(extent_log2, depth)?;
        let h = g.step();
        for (i, s) in g.samples.iter_mut().enumerate() {
            *s = f((i as f64 + 0.5) * h);
        }
        Self::new(extent_log2, depth, g.samples)
    }

    /// `m`, where the domain is `[0, 2^m)`.
    pub fn extent_log2(&self) -> u32 {
        self.extent_log2
    }

    /// `J`, where the cell width is `2^-J`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn step(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Midpoint of cell `i`.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.step()
    }

    /// Index of the cell containing `x`, if it is in the domain.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let i = (x / self.step()).floor();
        (i >= 0.0 && (i as usize) < self.len()).then_some(i as usize)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.step() * self.samples.iter().map(|s| s * s).sum::<f64>()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.step() * self.samples.iter().map(|s| s.abs()).sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GridFunction {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            ..self.clone()
        }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.extent_log2 == other.extent_log2 && self.depth == other.depth
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{TEXT_HEADER}\n# extent_log2 {}\n# depth {}\n",
            self.extent_log2, self.depth
        );
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:?} {:?}\n", self.x(i), s));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            kind: "grid function text",
            reason,
        };
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(TEXT_HEADER) {
            return Err(bad("missing header".into()));
        }
        let mut header_value = |key: &str| -> Result<u32> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
            line.strip_prefix("# ")
                .and_then(|l| l.strip_prefix(key))
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(format!("malformed {key} line: {line:?}")))
        };
        let m = header_value("extent_log2")?;
        let depth = header_value("depth")?;
        let mut samples = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let value = match (cols.next(), cols.next(), cols.next()) {
                (Some(_), Some(v), None) => v.parse::<f64>().ok(),
                _ => None,
            }
            .ok_or_else(|| bad(format!("data line {} is not `x value`", n + 1)))?;
            samples.push(value);
        }
        Self::new(m, depth, samples).map_err(|e| bad(e.to_string()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 8 * self.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
        out.extend_from_slice(&self.extent_log2.to_le_bytes());
        out.extend_from_slice(&self.depth.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for s in &self.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            kind: "grid function binary",
            reason: reason.to_string(),
        };
        if bytes.len() < 24 || &bytes[..4] != MAGIC {
            return Err(bad("missing WSGF header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        if u32_at(4) != BINARY_VERSION {
            return Err(bad("unsupported version"));
        }
        let (m, depth) = (u32_at(8), u32_at(12));
        let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let body = &bytes[24..];
        if body.len() as u64 != count.saturating_mul(8) {
            return Err(bad("sample count does not match payload length"));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(m, depth, samples).map_err(|e| bad(&e.to_string()))
    }

    /// Writes text or binary depending on the extension (`.bin` is binary).
    pub fn write(&self, path: &Path) -> Result<()> {
        let bytes = if path.extension().is_some_and(|e| e == "bin") {
            self.to_bytes()
        } else {
            self.to_text().into_bytes()
        };
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(MAGIC) {
            Self::from_bytes(&bytes)
        } else {
            let text = String::from_utf8(bytes).map_err(|_| Error::Format {
                kind: "grid function text",
                reason: "not UTF-8".into(),
            })?;
            Self::from_text(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFunction {
        GridFunction::from_fn(1, 3, |x| (3.0 * x).sin() - 0.1).unwrap()
    }

    #[test]
    fn norms() {
        let g = GridFunction::new(0, 1, vec![1.0, -3.0]).unwrap();
        assert_eq!(g.l1_norm(), 2.0);
        assert_eq!(g.l2_norm(), 5f64.sqrt());
        assert_eq!(g.cell_of(0.7), Some(1));
        assert_eq!(g.cell_of(1.0), None);
        assert!(GridFunction::new(0, 1, vec![1.0]).is_err());
        assert!(GridFunction::new(0, 1, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = sample();
        assert_eq!(GridFunction::from_text(&g.to_text()).unwrap(), g);
        assert!(GridFunction::from_text("nope").is_err());
        let broken = g.to_text().replace("# depth 3", "# depth 4");
        assert!(GridFunction::from_text(&broken).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let g = sample();
        assert_eq!(GridFunction::from_bytes(&g.to_bytes()).unwrap(), g);
        let mut bytes = g.to_bytes();
        bytes.pop();
        assert!(GridFunction::from_bytes(&bytes).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = sample();
        for name in ["f.txt", "f.bin"] {
            let path = dir.path().join(name);
            g.write(&path).unwrap();
            assert_eq!(GridFunction::read(&path).unwrap(), g);
        }
        assert!(matches!(
            GridFunction::read(&dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }
}
