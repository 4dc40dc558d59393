//! Size and regularity sweeps of `||Sigma(x, y; .)||_{L2(Omega)}`.

use serde::Serialize;

use super::cell_seed;
use super::config::ExperimentConfig;
use super::report::{num, Outcome, Table};
use crate::dyadic::pow2;
use crate::error::Result;
use crate::randkernel::{haar_size_envelope, PreparedPair};
use crate::stats::{log_log_slope, par_chunked, McEstimate, Moments};
use crate::subgauss::Realization;
use crate::wavelets::WaveletFamily;

#[derive(Clone, Debug, Serialize)]
pub struct CzRow {
    pub distance: f64,
    pub x: f64,
    pub y: f64,
    /// Monte Carlo estimate of the `L2(Omega)` norm.
    pub norm: McEstimate,
    /// Exact norm of the kept series, by independence.
    pub exact_norm: f64,
    /// Analytic envelope, when one is known.
    pub envelope: Option<f64>,
    /// `norm * distance^order`.
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CzFamily {
    pub name: String,
    /// 1 for size estimates, 2 for the gradient.
    pub order: i32,
    pub rows: Vec<CzRow>,
    pub slope: f64,
    pub slope_target: f64,
    pub slope_tol: f64,
    /// `max (upper CI) * distance^order` over the sweep.
    pub fitted_b: f64,
    pub envelope_ok: bool,
    pub passed: bool,
}

impl CzFamily {
    fn finish(name: &str, order: i32, rows: Vec<CzRow>, tol: f64) -> Self {
        let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
        let v: Vec<f64> = rows.iter().map(|r| r.norm.mean).collect();
        let slope = log_log_slope(&d, &v);
        let fitted_b = rows
            .iter()
            .map(|r| r.norm.ci_high * r.distance.powi(order))
            .fold(0.0, f64::max);
        let envelope_ok = rows
            .iter()
            .all(|r| r.envelope.is_none_or(|e| r.norm.ci_low <= e));
        let target = -(order as f64);
        CzFamily {
            name: name.to_string(),
            order,
            slope,
            slope_target: target,
            slope_tol: tol,
            fitted_b,
            envelope_ok,
            passed: envelope_ok && (slope - target).abs() <= tol,
            rows,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CzReport {
    pub families: Vec<CzFamily>,
}

impl CzReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(|f| f.passed)
    }

    pub fn outcome(&self) -> Outcome {
        let mut t = Table::new(
            "cz_sweep",
            vec![
                "family",
                "distance",
                "x",
                "y",
                "norm",
                "ci_low",
                "ci_high",
                "exact_norm",
                "envelope",
                "scaled",
            ],
        );
        for f in &self.families {
            for r in &f.rows {
                t.push(vec![
                    f.name.clone(),
                    num(r.distance),
                    num(r.x),
                    num(r.y),
                    num(r.norm.mean),
                    num(r.norm.ci_low),
                    num(r.norm.ci_high),
                    num(r.exact_norm),
                    r.envelope.map(num).unwrap_or_default(),
                    num(r.scaled),
                ]);
            }
        }
        let mut fits = Table::new(
            "cz_fits",
            vec![
                "family",
                "slope",
                "slope_target",
                "slope_tol",
                "fitted_b",
                "passed",
            ],
        );
        for f in &self.families {
            fits.push(vec![
                f.name.clone(),
                num(f.slope),
                num(f.slope_target),
                num(f.slope_tol),
                num(f.fitted_b),
                f.passed.to_string(),
            ]);
        }
        Outcome::new("cz-sweep", self.passed(), self, vec![t, fits])
    }
}

/// Monte Carlo second moments of `(Sigma, d Sigma / dx)`.
fn second_moments(
    pair: &PreparedPair,
    seed: u64,
    n: u64,
    conf: f64,
    gradient: bool,
) -> Result<(McEstimate, McEstimate)> {
    let (a, b) = par_chunked(
        n,
        || (Moments::default(), Moments::default()),
        |acc, r| {
            let omega = Realization::new(seed, r);
            if gradient {
                let (v, d) = pair
                    .centered_with_dx(&omega)
                    .expect("prepared with derivatives");
                acc.0.push(v * v);
                acc.1.push(d * d);
            } else {
                acc.0.push(pair.centered(&omega).value.powi(2));
            }
        },
        |acc, part| {
            acc.0.merge(part.0);
            acc.1.merge(part.1);
        },
    );
    Ok((a.estimate(conf), b.estimate(conf)))
}

pub fn run_cz_sweep(config: &ExperimentConfig) -> Result<CzReport> {
    let c = &config.cz_sweep;
    let n = config.n(c.replicates);
    let conf = config.confidence;
    let model = &config.model;
    let haar = WaveletFamily::haar();

    let mut haar_rows = Vec::new();
    for (idx, &e) in c.haar_exponents.iter().enumerate() {
        let delta = pow2(-e);
        let k = (c.anchor / delta).floor();
        let (x, y) = ((k + 0.25) * delta, (k + 0.75) * delta);
        let pair = PreparedPair::new(&haar, model, x, y, &config.job, false)?;
        let (m2, _) = second_moments(
            &pair,
            cell_seed(config.seed, 10, idx as u64),
            n,
            conf,
            false,
        )?;
        let norm = m2.sqrt();
        haar_rows.push(CzRow {
            distance: delta,
            x,
            y,
            norm,
            exact_norm: pair.centered_second_moment().sqrt(),
            envelope: Some(haar_size_envelope(model.nu(), delta)),
            scaled: norm.mean * delta,
        });
    }

    let smooth = config.smooth_wavelet()?;
    let mut size_rows = Vec::new();
    let mut grad_rows = Vec::new();
    for (idx, &e) in c.smooth_exponents.iter().enumerate() {
        let d = pow2(-e);
        let (x, y) = (c.anchor, c.anchor + d);
        let pair = PreparedPair::new(&smooth, model, x, y, &config.job, true)?;
        let (m2, g2) =
            second_moments(&pair, cell_seed(config.seed, 11, idx as u64), n, conf, true)?;
        let (norm, gnorm) = (m2.sqrt(), g2.sqrt());
        size_rows.push(CzRow {
            distance: d,
            x,
            y,
            norm,
            exact_norm: pair.centered_second_moment().sqrt(),
            envelope: None,
            scaled: norm.mean * d,
        });
        grad_rows.push(CzRow {
            distance: d,
            x,
            y,
            norm: gnorm,
            exact_norm: pair.centered_dx_second_moment()?.sqrt(),
            envelope: None,
            scaled: gnorm.mean * d * d,
        });
    }
    let name = smooth.name().to_string();
    Ok(CzReport {
        families: vec![
            CzFamily::finish("haar-size", 1, haar_rows, c.haar_slope_tol),
            CzFamily::finish(&format!("{name}-size"), 1, size_rows, c.smooth_slope_tol),
            CzFamily::finish(
                &format!("{name}-gradient"),
                2,
                grad_rows,
                c.gradient_slope_tol,
            ),
        ],
    })
}
