//! Vector-valued operator norm, pointwise variance and weak-type profiles.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{num, Outcome, Table};
use super::{aux_rng, cell_seed};
use crate::error::Result;
use crate::operator::{
    analyze, pointwise_centered_variance, sample_operator_at, vector_norm_t, weak11_profile,
    GridFunction, Part, VectorNormReport, Weak11Profile,
};
use crate::stats::{bonferroni, mc_mean, McEstimate};
use crate::subgauss::{CoefficientModel, MeanProfile, Realization};
use crate::wavelets::WaveletFamily;

/// Accepted excess of an estimate over its bound, in CI half-widths.
pub const BOUND_SLACK: f64 = 3.0;

#[derive(Clone, Debug, Serialize)]
pub struct OperatorNormRow {
    pub wavelet: String,
    pub model: String,
    pub function: usize,
    pub depth: u32,
    pub norm: VectorNormReport,
    pub within_bound: bool,
    /// Haar only: exact norm inside the simultaneous interval.
    pub exact_in_ci: Option<bool>,
}

impl OperatorNormRow {
    fn passed(&self) -> bool {
        self.within_bound && self.exact_in_ci != Some(false)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub x: f64,
    pub estimate: McEstimate,
    pub exact: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorBoundReport {
    pub rows: Vec<OperatorNormRow>,
    pub combinations: Vec<OperatorNormRow>,
    pub probes: Vec<ProbeRow>,
}

impl OperatorBoundReport {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .chain(&self.combinations)
            .all(OperatorNormRow::passed)
            && self.probes.iter().all(|p| p.passed)
    }

    pub fn outcome(&self) -> Outcome {
        let mut norms = Table::new(
            "operator_norms",
            vec![
                "wavelet",
                "model",
                "function",
                "depth",
                "f_l2",
                "estimate",
                "ci_low",
                "ci_high",
                "exact",
                "certified_bound",
                "passed",
            ],
        );
        for r in self.rows.iter().chain(&self.combinations) {
            norms.push(vec![
                r.wavelet.clone(),
                r.model.clone(),
                r.function.to_string(),
                r.depth.to_string(),
                num(r.norm.f_l2),
                num(r.norm.estimate.mean),
                num(r.norm.estimate.ci_low),
                num(r.norm.estimate.ci_high),
                r.norm.exact.map(num).unwrap_or_default(),
                num(r.norm.certified_bound),
                r.passed().to_string(),
            ]);
        }
        let mut probes = Table::new(
            "operator_pointwise",
            vec!["x", "estimate", "ci_low", "ci_high", "exact", "passed"],
        );
        for p in &self.probes {
            probes.push(vec![
                num(p.x),
                num(p.estimate.mean),
                num(p.estimate.ci_low),
                num(p.estimate.ci_high),
                num(p.exact),
                p.passed.to_string(),
            ]);
        }
        Outcome::new("operator-bound", self.passed(), self, vec![norms, probes])
    }
}

fn white_noise(seed: u64, stream: u64, depth: u32) -> Result<GridFunction> {
    let mut rng = aux_rng(seed, stream);
    let samples = (0..1usize << depth)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    GridFunction::new(0, depth, samples)
}

fn norm_row(
    config: &ExperimentConfig,
    w: &WaveletFamily,
    model: &CoefficientModel,
    f: &GridFunction,
    function: usize,
    seed: u64,
    confidence: f64,
) -> Result<OperatorNormRow> {
    let n = config.n(config.operator.replicates);
    let norm = vector_norm_t(w, model, f, &config.job, n, seed, confidence)?;
    Ok(OperatorNormRow {
        wavelet: w.name().to_string(),
        model: model.name(),
        function,
        depth: f.depth(),
        within_bound: norm.within_bound(BOUND_SLACK),
        exact_in_ci: norm.exact.map(|e| norm.estimate.contains(e)),
        norm,
    })
}

/// The models of the combination sweep.
pub fn combination_models() -> Vec<CoefficientModel> {
    vec![
        CoefficientModel::gaussian(1.0),
        CoefficientModel::rademacher(),
        CoefficientModel::bounded_uniform(-1.0, 1.0),
        CoefficientModel::truncated_gaussian(1.5),
        CoefficientModel::gaussian(1.0).with_mean(MeanProfile::Geometric { mu0: 0.5 }),
    ]
}

pub fn run_operator_bound(config: &ExperimentConfig) -> Result<OperatorBoundReport> {
    let c = &config.operator;
    let haar = WaveletFamily::haar();
    let family_conf = bonferroni(config.confidence, c.functions);
    let mut rows = Vec::with_capacity(c.functions);
    let mut functions = Vec::with_capacity(c.functions);
    for i in 0..c.functions {
        let f = white_noise(config.seed, 100 + i as u64, c.depth)?;
        let seed = cell_seed(config.seed, 30, i as u64);
        rows.push(norm_row(
            config,
            &haar,
            &config.model,
            &f,
            i,
            seed,
            family_conf,
        )?);
        functions.push(f);
    }

    let mut probes = Vec::with_capacity(c.probes);
    if let Some(f) = functions.first() {
        let coeffs = analyze(&haar, f, &config.job)?;
        let mut rng = aux_rng(config.seed, 4);
        let probe_conf = bonferroni(config.confidence, c.probes);
        let n = config.n(c.replicates);
        for p in 0..c.probes {
            let x: f64 = rng.random();
            let seed = cell_seed(config.seed, 31, p as u64);
            let estimate = mc_mean(n, probe_conf, |r| {
                sample_operator_at(
                    &haar,
                    &coeffs,
                    &config.model,
                    x,
                    &Realization::new(seed, r),
                    Part::Centered,
                )
                .powi(2)
            });
            let exact = pointwise_centered_variance(&haar, &coeffs, &config.model, x);
            probes.push(ProbeRow {
                x,
                estimate,
                exact,
                passed: estimate.contains(exact),
            });
        }
    }

    let smooth = config.smooth_wavelet()?;
    let models = combination_models();
    let f = white_noise(config.seed, 99, c.combination_depth)?;
    let combo_conf = bonferroni(config.confidence, 2 * models.len());
    let mut combinations = Vec::new();
    for (wi, w) in [&haar, &smooth].into_iter().enumerate() {
        for (mi, model) in models.iter().enumerate() {
            let seed = cell_seed(config.seed, 32, (wi * models.len() + mi) as u64);
            combinations.push(norm_row(config, w, model, &f, 0, seed, combo_conf)?);
        }
    }
    Ok(OperatorBoundReport {
        rows,
        combinations,
        probes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Weak11Report {
    pub spike: Weak11Profile,
    pub scaled: Weak11Profile,
    pub zero: Weak11Profile,
    pub scale: f64,
    /// Superlevel measures of `scale * f` at `scale * lambda` equal those of `f`.
    pub homogeneous: bool,
    pub fitted_c: f64,
    pub c_max: f64,
}

impl Weak11Report {
    pub fn passed(&self) -> bool {
        self.homogeneous
            && self.fitted_c <= self.c_max
            && self.zero.rows.iter().all(|r| r.measure == 0.0)
    }

    pub fn outcome(&self) -> Outcome {
        let mut t = Table::new(
            "weak11",
            vec!["function", "lambda", "measure", "normalized_product"],
        );
        for (name, p) in [
            ("spike", &self.spike),
            ("scaled", &self.scaled),
            ("zero", &self.zero),
        ] {
            for r in &p.rows {
                t.push(vec![
                    name.to_string(),
                    num(r.lambda),
                    num(r.measure),
                    num(r.normalized_product),
                ]);
            }
        }
        Outcome::new("weak11", self.passed(), self, vec![t])
    }
}

/// Unit-mass spike of width `2^-width_log2` centered near `center`.
pub fn spike(depth: u32, width_log2: u32, center: f64) -> Result<GridFunction> {
    let width = (-(width_log2 as f64)).exp2();
    let left = center - 0.5 * width;
    GridFunction::from_fn(0, depth, |x| {
        if (left..left + width).contains(&x) {
            1.0 / width
        } else {
            0.0
        }
    })
}

pub fn run_weak11(config: &ExperimentConfig) -> Result<Weak11Report> {
    let c = &config.weak11;
    let haar = WaveletFamily::haar();
    let n = config.n(c.replicates);
    let seed = cell_seed(config.seed, 40, 0);
    let f = spike(c.depth, c.spike_log2_width, c.spike_center)?;
    let profile = |g: &GridFunction| {
        weak11_profile(&haar, &config.model, g, &config.job, n, seed, &c.thresholds)
    };
    let spike_profile = profile(&f)?;
    let scaled = profile(&f.scaled(c.scale))?;
    let zero = profile(&GridFunction::zeros(0, c.depth)?)?;
    let homogeneous = spike_profile.rows.len() == scaled.rows.len()
        && spike_profile
            .rows
            .iter()
            .zip(&scaled.rows)
            .all(|(a, b)| a.measure == b.measure);
    Ok(Weak11Report {
        fitted_c: spike_profile.fitted_c.max(scaled.fitted_c),
        spike: spike_profile,
        scaled,
        zero,
        scale: c.scale,
        homogeneous,
        c_max: c.c_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_has_unit_mass() {
        let f = spike(12, 10, 0.5).unwrap();
        assert!((f.l1_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_weak11_passes() {
        let mut config = ExperimentConfig::default();
        config.weak11.depth = 8;
        config.weak11.spike_log2_width = 6;
        config.weak11.replicates = 200;
        let report = run_weak11(&config).unwrap();
        assert!(report.homogeneous);
        assert!(report.passed(), "{report:?}");
    }
}
