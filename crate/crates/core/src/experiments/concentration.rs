//! Tail probabilities of the centered kernel and of `T f(x)` against the
//! sharp subgaussian bounds.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{num, Outcome, Table};
use super::{cell_seed, tail_check};
use crate::dyadic::pow2;
use crate::dyadic::DyadicIndex;
use crate::error::Result;
use crate::operator::{analyze, pointwise_square_mass, sample_operator_at, GridFunction, Part};
use crate::randkernel::{square_summability, KernelJob, PreparedPair};
use crate::stats::{par_chunked, McEstimate};
use crate::subgauss::{CoefficientModel, Distribution, Realization};
use crate::wavelets::WaveletFamily;

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationCell {
    /// Probe point (operator cells) or first point of the pair.
    pub x: f64,
    pub y: Option<f64>,
    pub distance: Option<f64>,
    pub target: f64,
    pub t: f64,
    /// `S` for kernel cells and `D = sum c_I^2 psi_I(x)^2` for operator cells.
    pub square_mass: f64,
    /// `2 exp(-t^2 / (4 nu S))`.
    pub sharp_bound: f64,
    /// The same bound written through the distance, when one is available.
    pub metric_bound: Option<f64>,
    /// Exact tail of the kept sum for Gaussian coefficients.
    pub exact_tail: Option<f64>,
    pub estimate: McEstimate,
    pub exceedances: u64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub family: &'static str,
    pub wavelet: String,
    pub model: String,
    pub replicates: u64,
    /// Smooth cells: fitted `max S(x, y) |x - y|^2`.
    pub fitted_c_sq: Option<f64>,
    pub cells: Vec<ConcentrationCell>,
}

impl ConcentrationReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed)
    }

    pub fn outcome(&self) -> Outcome {
        let mut t = Table::new(
            format!("concentration_{}", self.family),
            vec![
                "x",
                "y",
                "distance",
                "target",
                "t",
                "square_mass",
                "sharp_bound",
                "metric_bound",
                "exact_tail",
                "tail",
                "wilson_low",
                "wilson_high",
                "passed",
            ],
        );
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        for c in &self.cells {
            t.push(vec![
                num(c.x),
                opt(c.y),
                opt(c.distance),
                num(c.target),
                num(c.t),
                num(c.square_mass),
                num(c.sharp_bound),
                opt(c.metric_bound),
                opt(c.exact_tail),
                num(c.estimate.mean),
                num(c.estimate.ci_low),
                num(c.estimate.ci_high),
                c.passed.to_string(),
            ]);
        }
        Outcome::new(
            &format!("concentration-{}", self.family),
            self.passed(),
            self,
            vec![t],
        )
    }
}

/// `t` with `2 exp(-t^2 / (4 nu s)) = target`, and the bound at that `t`.
/// A degenerate sum (`nu s = 0`) is never above `t = 1`.
fn level_for(nu: f64, s: f64, target: f64) -> (f64, f64) {
    if nu * s == 0.0 {
        (1.0, 0.0)
    } else {
        let t = (4.0 * nu * s * (2.0 / target).ln()).sqrt();
        (t, sharp(nu, s, t))
    }
}

fn sharp(nu: f64, s: f64, t: f64) -> f64 {
    if nu * s == 0.0 {
        0.0
    } else {
        (2.0 * (-t * t / (4.0 * nu * s)).exp()).min(1.0)
    }
}

/// `P{|Z| > t}` for `Z ~ N(0, var)`.
fn gaussian_tail(model: &CoefficientModel, mass: f64, t: f64) -> Option<f64> {
    matches!(model.dist, Distribution::Gaussian { .. }).then(|| {
        let sd = (model.variance() * mass).sqrt();
        if sd == 0.0 {
            0.0
        } else {
            libm::erfc(t / (sd * std::f64::consts::SQRT_2))
        }
    })
}

/// Exceedance counts of `|draw(r)| > t` for every `t`, over `n` replicates.
fn count_exceedances(n: u64, ts: &[f64], draw: impl Fn(u64) -> f64 + Sync) -> Vec<u64> {
    par_chunked(
        n,
        || vec![0u64; ts.len()],
        |acc, r| {
            let v = draw(r).abs();
            for (a, &t) in acc.iter_mut().zip(ts) {
                *a += u64::from(v > t);
            }
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    )
}

struct Level {
    target: f64,
    t: f64,
    bound: f64,
    metric: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cells_for(
    config: &ExperimentConfig,
    n: u64,
    x: f64,
    y: Option<f64>,
    distance: Option<f64>,
    mass: f64,
    exact_mass: f64,
    levels: Vec<Level>,
    draw: impl Fn(u64) -> f64 + Sync,
) -> Vec<ConcentrationCell> {
    let ts: Vec<f64> = levels.iter().map(|l| l.t).collect();
    let counts = count_exceedances(n, &ts, draw);
    levels
        .into_iter()
        .zip(counts)
        .map(|(l, k)| {
            let estimate = McEstimate::wilson(k, n, config.confidence);
            let bound = l.metric.map_or(l.bound, |m| m.min(l.bound));
            ConcentrationCell {
                x,
                y,
                distance,
                target: l.target,
                t: l.t,
                square_mass: mass,
                sharp_bound: l.bound,
                metric_bound: l.metric,
                exact_tail: gaussian_tail(&config.model, exact_mass, l.t),
                estimate,
                exceedances: k,
                passed: tail_check(k, estimate.ci_high, bound),
            }
        })
        .collect()
}

/// Haar pairs at dyadic distance `delta`, where `S = (4/3) / delta^2` and the
/// sharp bound reads `2 exp(-3 delta^2 t^2 / (16 nu))`.
pub fn run_concentration_haar(config: &ExperimentConfig) -> Result<ConcentrationReport> {
    let c = &config.concentration;
    let n = config.n(c.replicates);
    let nu = config.model.nu();
    let haar = WaveletFamily::haar();
    let mut cells = Vec::new();
    for (idx, &delta) in c.haar_deltas.iter().enumerate() {
        let k = (c.anchor / delta).floor();
        let (x, y) = ((k + 0.25) * delta, (k + 0.75) * delta);
        let s = square_summability(&haar, x, y, &config.job)?.value;
        let metric = |t: f64| {
            if nu == 0.0 {
                0.0
            } else {
                (2.0 * (-3.0 * delta * delta * t * t / (16.0 * nu)).exp()).min(1.0)
            }
        };
        let levels = c
            .target_bounds
            .iter()
            .map(|&target| {
                let t = if nu == 0.0 {
                    1.0
                } else {
                    (16.0 * nu * (2.0 / target).ln() / (3.0 * delta * delta)).sqrt()
                };
                Level {
                    target,
                    t,
                    bound: sharp(nu, s, t),
                    metric: Some(metric(t)),
                }
            })
            .collect();
        let pair = PreparedPair::new(&haar, &config.model, x, y, &config.job, false)?;
        let exact_mass =
            pair.centered_second_moment() / config.model.variance().max(f64::MIN_POSITIVE);
        let seed = cell_seed(config.seed, 20, idx as u64);
        cells.extend(cells_for(
            config,
            n,
            x,
            Some(y),
            Some(delta),
            s,
            exact_mass,
            levels,
            |r| pair.centered(&Realization::new(seed, r)).value,
        ));
    }
    Ok(ConcentrationReport {
        family: "haar",
        wavelet: haar.name().to_string(),
        model: config.model.name(),
        replicates: n,
        fitted_c_sq: None,
        cells,
    })
}

/// Smooth pairs `(anchor, anchor + d)`. `S` includes the certified bound on
/// the omitted scales; the metric column uses the fitted `c^2 = max S d^2`.
pub fn run_concentration_smooth(config: &ExperimentConfig) -> Result<ConcentrationReport> {
    let c = &config.concentration;
    let n = config.n(c.smooth_replicates);
    let nu = config.model.nu();
    let w = config.smooth_wavelet()?;
    let job = KernelJob::new(
        c.smooth_scale_min,
        config.job.scale_max,
        config.job.tail_tol,
    )?;
    let mut c_sq: f64 = 0.0;
    for e in 1..=12 {
        let d = pow2(-e);
        let s = square_summability(&w, c.anchor, c.anchor + d, &job)?;
        c_sq = c_sq.max((s.value + s.tail_bound) * d * d);
    }
    for &d in &c.smooth_distances {
        let s = square_summability(&w, c.anchor, c.anchor + d, &job)?;
        c_sq = c_sq.max((s.value + s.tail_bound) * d * d);
    }
    let mut cells = Vec::new();
    for (idx, &d) in c.smooth_distances.iter().enumerate() {
        let (x, y) = (c.anchor, c.anchor + d);
        let sv = square_summability(&w, x, y, &job)?;
        let s = sv.value + sv.tail_bound;
        let levels = c
            .target_bounds
            .iter()
            .map(|&target| {
                let (t, bound) = level_for(nu, s, target);
                Level {
                    target,
                    t,
                    bound,
                    metric: Some(sharp(nu, c_sq / (d * d), t)),
                }
            })
            .collect();
        let pair = PreparedPair::new(&w, &config.model, x, y, &job, false)?;
        let seed = cell_seed(config.seed, 21, idx as u64);
        cells.extend(cells_for(
            config,
            n,
            x,
            Some(y),
            Some(d),
            s,
            sv.value,
            levels,
            |r| pair.centered(&Realization::new(seed, r)).value,
        ));
    }
    Ok(ConcentrationReport {
        family: "smooth",
        wavelet: w.name().to_string(),
        model: config.model.name(),
        replicates: n,
        fitted_c_sq: Some(c_sq),
        cells,
    })
}

/// Centered `T f(x)` at probe points for a generic function and for a single
/// Haar wavelet, whose off-support probes have `D = 0`.
pub fn run_concentration_operator(config: &ExperimentConfig) -> Result<ConcentrationReport> {
    use std::f64::consts::PI;
    let c = &config.concentration;
    let n = config.n(c.operator_replicates);
    let nu = config.model.nu();
    let haar = WaveletFamily::haar();
    let depth = c.operator_depth;
    let f = GridFunction::from_fn(0, depth, |x| {
        (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos() + x
    })?;
    let spike = DyadicIndex::new(2, 1);
    let g = GridFunction::from_fn(0, depth, |x| 1.5 * haar.eval_psi_i(spike, x))?;
    let mut cells = Vec::new();
    for (fi, func) in [f, g].iter().enumerate() {
        let coeffs = analyze(&haar, func, &config.job)?;
        for (pi, &x) in c.probes.iter().enumerate() {
            let mass = pointwise_square_mass(&haar, &coeffs, x);
            let levels = c
                .target_bounds
                .iter()
                .map(|&target| {
                    let (t, bound) = level_for(nu, mass, target);
                    Level {
                        target,
                        t,
                        bound,
                        metric: None,
                    }
                })
                .collect();
            let seed = cell_seed(config.seed, 22, (fi * c.probes.len() + pi) as u64);
            let model = &config.model;
            cells.extend(cells_for(
                config,
                n,
                x,
                None,
                None,
                mass,
                mass,
                levels,
                |r| {
                    sample_operator_at(
                        &haar,
                        &coeffs,
                        model,
                        x,
                        &Realization::new(seed, r),
                        Part::Centered,
                    )
                },
            ));
        }
    }
    Ok(ConcentrationReport {
        family: "operator",
        wavelet: haar.name().to_string(),
        model: config.model.name(),
        replicates: n,
        fitted_c_sq: None,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_hits_target() {
        let (t, b) = level_for(1.0, 3.0, 0.01);
        assert!((b - 0.01).abs() < 1e-15);
        assert!((sharp(1.0, 3.0, t) - 0.01).abs() < 1e-15);
        assert_eq!(level_for(0.0, 3.0, 0.1), (1.0, 0.0));
    }

    #[test]
    fn small_haar_run_passes() {
        let mut config = ExperimentConfig::default();
        config.concentration.replicates = 20_000;
        let report = run_concentration_haar(&config).unwrap();
        assert_eq!(report.cells.len(), 6);
        assert!(report.passed());
        for cell in &report.cells {
            assert!((cell.metric_bound.unwrap() - cell.target).abs() < 1e-12);
        }
    }

    #[test]
    fn off_support_operator_cells_are_degenerate() {
        let mut config = ExperimentConfig::default();
        config.concentration.operator_replicates = 2000;
        let report = run_concentration_operator(&config).unwrap();
        let degenerate: Vec<_> = report
            .cells
            .iter()
            .filter(|c| c.square_mass == 0.0)
            .collect();
        assert_eq!(degenerate.len(), 6);
        assert!(degenerate.iter().all(|c| c.exceedances == 0));
        assert!(report.passed());
    }
}
