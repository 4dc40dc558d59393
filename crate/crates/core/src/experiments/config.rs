//! Experiment configuration, read from TOML.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! Top-level keys set the seed, confidence level and tolerances; the
//! `[model]`, `[job]` and `[wavelet]` blocks are shared by all experiments
//! and each experiment has its own block. See the README for an example.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randkernel::KernelJob;
use crate::stats::DEFAULT_CONFIDENCE;
use crate::subgauss::CoefficientModel;
use crate::wavelets::{TabulatedWavelet, WaveletFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Two-sided confidence of every interval.
    pub confidence: f64,
    /// Multiplies every replicate count by ten.
    pub thorough: bool,
    /// Overrides every per-experiment replicate count.
    pub replicates: Option<u64>,
    /// Remainder tolerance for three-series certificates.
    pub certificate_tol: f64,
    pub wavelet: WaveletConfig,
    pub model: CoefficientModel,
    pub job: KernelJob,
    pub haar_identity: HaarIdentityConfig,
    pub cz_sweep: CzSweepConfig,
    pub concentration: ConcentrationConfig,
    pub three_series: ThreeSeriesConfig,
    pub operator: OperatorConfig,
    pub weak11: Weak11Config,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 20_240_917,
            confidence: DEFAULT_CONFIDENCE,
            thorough: false,
            replicates: None,
            certificate_tol: 1e-8,
            wavelet: WaveletConfig::default(),
            model: CoefficientModel::gaussian(1.0),
            job: KernelJob::default(),
            haar_identity: HaarIdentityConfig::default(),
            cz_sweep: CzSweepConfig::default(),
            concentration: ConcentrationConfig::default(),
            three_series: ThreeSeriesConfig::default(),
            operator: OperatorConfig::default(),
            weak11: Weak11Config::default(),
        }
    }
}

/// Which smooth wavelet the smooth experiments use.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletConfig {
    /// Path to a wavelet table; the built-in Meyer table when absent.
    pub table: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HaarIdentityConfig {
    pub pairs: usize,
    /// Largest binary depth of the random dyadic points.
    pub max_depth: u32,
    pub triples: usize,
    pub realizations: u64,
}

impl Default for HaarIdentityConfig {
    fn default() -> Self {
        HaarIdentityConfig {
            pairs: 500,
            max_depth: 16,
            triples: 1000,
            realizations: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzSweepConfig {
    pub replicates: u64,
    /// Haar pairs have `delta = 2^-e` for each `e`.
    pub haar_exponents: Vec<i32>,
    /// Smooth pairs have `|x - y| = 2^-e` for each `e`.
    pub smooth_exponents: Vec<i32>,
    /// Left point of every smooth pair, and the point the Haar pairs cluster around.
    pub anchor: f64,
    pub haar_slope_tol: f64,
    pub smooth_slope_tol: f64,
    pub gradient_slope_tol: f64,
}

impl Default for CzSweepConfig {
    fn default() -> Self {
        CzSweepConfig {
            replicates: 2000,
            haar_exponents: (0..=7).collect(),
            smooth_exponents: (3..=10).collect(),
            anchor: 0.3,
            haar_slope_tol: 0.05,
            smooth_slope_tol: 0.1,
            gradient_slope_tol: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    /// Replicates for Haar cells.
    pub replicates: u64,
    pub smooth_replicates: u64,
    pub operator_replicates: u64,
    /// Haar cells: dyadic distances.
    pub haar_deltas: Vec<f64>,
    /// Each cell's `t` is chosen so that the sharp bound equals these values.
    pub target_bounds: Vec<f64>,
    /// Smooth cells: `|x - y|` with `x = anchor`.
    pub smooth_distances: Vec<f64>,
    pub anchor: f64,
    /// Coarsest scale kept for smooth cells.
    pub smooth_scale_min: i32,
    /// Operator cells: probe points in `[0, 1)`.
    pub probes: Vec<f64>,
    /// Operator cells: grid depth of the probe function.
    pub operator_depth: u32,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        ConcentrationConfig {
            replicates: 1_000_000,
            smooth_replicates: 20_000,
            operator_replicates: 200_000,
            haar_deltas: vec![1.0, 0.5, 0.25],
            target_bounds: vec![0.1, 0.01],
            smooth_distances: vec![0.125, 0.015625],
            anchor: 0.3,
            smooth_scale_min: -4,
            probes: vec![0.1, 0.35, 0.6, 0.85],
            operator_depth: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeSeriesConfig {
    pub pairs: usize,
    pub truncations: Vec<f64>,
    pub models: Vec<CoefficientModel>,
    pub include_smooth: bool,
}

impl Default for ThreeSeriesConfig {
    fn default() -> Self {
        ThreeSeriesConfig {
            pairs: 20,
            truncations: vec![0.5, 1.0, 2.0],
            models: vec![
                CoefficientModel::gaussian(1.0),
                CoefficientModel::bounded_uniform(-1.0, 1.0),
            ],
            include_smooth: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    pub functions: usize,
    /// Grid depth `J` on `[0, 1)`.
    pub depth: u32,
    pub replicates: u64,
    /// Probe points for the pointwise variance identity.
    pub probes: usize,
    /// Grid depth for the model and wavelet combination sweep.
    pub combination_depth: u32,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            functions: 20,
            depth: 14,
            replicates: 1000,
            probes: 10,
            combination_depth: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weak11Config {
    pub depth: u32,
    /// The spike has width `2^-spike_log2_width` and unit mass.
    pub spike_log2_width: u32,
    pub spike_center: f64,
    pub replicates: u64,
    /// Thresholds as multiples of `||f||_1`.
    pub thresholds: Vec<f64>,
    /// Homogeneity check: profile of `scale * f`.
    pub scale: f64,
    /// Largest accepted `lambda |{...}| / ||f||_1`.
    pub c_max: f64,
}

impl Default for Weak11Config {
    fn default() -> Self {
        Weak11Config {
            depth: 12,
            spike_log2_width: 10,
            spike_center: 0.5,
            replicates: 1000,
            thresholds: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0],
            scale: 4.0,
            c_max: 10.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replicate count after the global override and the thorough factor.
    pub fn n(&self, section_default: u64) -> u64 {
        let base = self.replicates.unwrap_or(section_default);
        if self.thorough {
            base.saturating_mul(10)
        } else {
            base
        }
    }

    pub fn smooth_wavelet(&self) -> Result<WaveletFamily> {
        match &self.wavelet.table {
            None => Ok(WaveletFamily::meyer()),
            Some(path) => WaveletFamily::from_table(TabulatedWavelet::read(path)?),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return fail(format!("confidence {} must lie in (0, 1)", self.confidence));
        }
        if !(self.certificate_tol > 0.0) {
            return fail("certificate_tol must be positive".into());
        }
        if self.replicates == Some(0) {
            return fail("replicates must be positive".into());
        }
        self.model
            .validate()
            .map_err(|e| Error::Config(format!("model: {e}")))?;
        self.job
            .validate()
            .map_err(|e| Error::Config(format!("job: {e}")))?;
        let c = &self.concentration;
        if c.target_bounds.iter().any(|b| !(*b > 0.0 && *b < 2.0)) {
            return fail("concentration target bounds must lie in (0, 2)".into());
        }
        if c.haar_deltas
            .iter()
            .any(|d| !(*d > 0.0) || d.log2().fract() != 0.0)
        {
            return fail("haar_deltas must be powers of two".into());
        }
        if c.smooth_distances.iter().any(|d| !(*d > 0.0)) {
            return fail("smooth distances must be positive: a pair needs x != y".into());
        }
        if c.probes.iter().any(|p| !(0.0..1.0).contains(p)) {
            return fail("operator probes must lie in [0, 1)".into());
        }
        let s = &self.three_series;
        if s.truncations.iter().any(|a| !(*a > 0.0)) {
            return fail("three-series truncations must be positive".into());
        }
        for m in &s.models {
            m.validate()
                .map_err(|e| Error::Config(format!("three_series model: {e}")))?;
        }
        if self.haar_identity.max_depth == 0 || self.haar_identity.max_depth > 40 {
            return fail("haar_identity.max_depth must lie in 1..=40".into());
        }
        if self.cz_sweep.haar_exponents.len() < 2 || self.cz_sweep.smooth_exponents.len() < 2 {
            return fail("a slope fit needs at least two distances".into());
        }
        if self.operator.depth > 20 || self.weak11.depth > 20 {
            return fail("grid depth is limited to 20".into());
        }
        if self.weak11.spike_log2_width > self.weak11.depth {
            return fail("the spike must be at least one cell wide".into());
        }
        if !(0.0..1.0).contains(&self.weak11.spike_center) {
            return fail("spike_center must lie in [0, 1)".into());
        }
        Ok(())
    }
}
