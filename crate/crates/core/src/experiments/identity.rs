//! Exact Haar checks: the square-sum identity and the regularity degeneracy.

use rand::Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{num, Outcome, Table};
use super::{aux_rng, random_dyadic_pair};
use crate::dyadic::{pow2, smallest_common};
use crate::error::Result;
use crate::randkernel::{haar_regularity_check, square_summability};
use crate::subgauss::Realization;
use crate::wavelets::{exact_point, WaveletFamily};

/// Largest accepted relative deviation of `S delta^2` from `4/3`.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub x: f64,
    pub y: f64,
    pub delta: f64,
    pub square_sum: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityRow {
    pub x: f64,
    pub x_prime: f64,
    pub y: f64,
    pub equal_realizations: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HaarIdentityReport {
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub identity_passed: bool,
    pub triples: usize,
    pub realizations: u64,
    pub regularity_failures: usize,
    pub regularity_passed: bool,
    pub rows: Vec<IdentityRow>,
    pub regularity: Vec<RegularityRow>,
}

impl HaarIdentityReport {
    pub fn passed(&self) -> bool {
        self.identity_passed && self.regularity_passed
    }

    pub fn outcome(&self) -> Outcome {
        let mut ident = Table::new(
            "haar_identity",
            vec!["x", "y", "delta", "square_sum", "scaled", "rel_err"],
        );
        for r in &self.rows {
            ident.push(vec![
                num(r.x),
                num(r.y),
                num(r.delta),
                num(r.square_sum),
                num(r.square_sum * r.delta * r.delta),
                num(r.rel_err),
            ]);
        }
        let mut reg = Table::new(
            "haar_regularity",
            vec!["x", "x_prime", "y", "equal_realizations", "realizations"],
        );
        for r in &self.regularity {
            reg.push(vec![
                num(r.x),
                num(r.x_prime),
                num(r.y),
                r.equal_realizations.to_string(),
                self.realizations.to_string(),
            ]);
        }
        Outcome::new("haar-identity", self.passed(), self, vec![ident, reg])
    }
}

pub fn run_haar_identity(config: &ExperimentConfig) -> Result<HaarIdentityReport> {
    let c = &config.haar_identity;
    let haar = WaveletFamily::haar();
    let mut rng = aux_rng(config.seed, 1);
    let mut rows = Vec::with_capacity(c.pairs);
    for _ in 0..c.pairs {
        let (x, y) = random_dyadic_pair(&mut rng, c.max_depth);
        let delta = smallest_common(exact_point(x)?, exact_point(y)?)?.length();
        let s = square_summability(&haar, x, y, &config.job)?.value;
        let rel_err = (s * delta * delta / (4.0 / 3.0) - 1.0).abs();
        rows.push(IdentityRow {
            x,
            y,
            delta,
            square_sum: s,
            rel_err,
        });
    }
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);

    let mut rng = aux_rng(config.seed, 2);
    let mut regularity = Vec::with_capacity(c.triples);
    for t in 0..c.triples {
        let (x, y) = random_dyadic_pair(&mut rng, c.max_depth);
        let root = smallest_common(exact_point(x)?, exact_point(y)?)?;
        // Any x' in the half of I(x, y) that holds x has 2 delta(x', x) <= delta(x, y).
        let half = root
            .children()
            .into_iter()
            .find(|h| h.contains(exact_point(x).expect("checked above")))
            .expect("x lies in one half of I(x, y)");
        let extra = rng.random_range(0..=8);
        let offset = rng.random_range(0..1u64 << extra) as f64 * pow2(-extra);
        let x_prime = half.left() + offset * half.length();
        let mut equal = 0;
        for r in 0..c.realizations {
            let omega = Realization::new(config.seed, t as u64 * c.realizations + r);
            if haar_regularity_check(&config.model, x, x_prime, y, &config.job, &omega)? {
                equal += 1;
            }
        }
        regularity.push(RegularityRow {
            x,
            x_prime,
            y,
            equal_realizations: equal,
        });
    }
    let regularity_failures = regularity
        .iter()
        .filter(|r| r.equal_realizations != c.realizations)
        .count();
    Ok(HaarIdentityReport {
        max_rel_err,
        tolerance: IDENTITY_TOL,
        identity_passed: max_rel_err <= IDENTITY_TOL,
        triples: c.triples,
        realizations: c.realizations,
        regularity_failures,
        regularity_passed: regularity_failures == 0,
        rows,
        regularity,
    })
}
