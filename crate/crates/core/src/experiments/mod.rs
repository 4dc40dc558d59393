//! Monte Carlo experiments that check the kernel and operator bounds, with
//! CSV and JSON reporting.
//!
//! Every verdict compares an analytically computed bound with either an
//! exact value or a confidence limit; no verdict rests on a point estimate.
//! Runs are deterministic functions of the configuration: random streams
//! are keyed by seed and replicate, and parallel reductions use fixed chunks.

mod concentration;
mod config;
mod cz;
mod identity;
mod operator;
mod report;
mod series;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::pow2;
use crate::error::{Error, Result};
use crate::subgauss::SeedPath;

pub use concentration::{
    run_concentration_haar, run_concentration_operator, run_concentration_smooth,
    ConcentrationCell, ConcentrationReport,
};
pub use config::{
    ConcentrationConfig, CzSweepConfig, ExperimentConfig, HaarIdentityConfig, OperatorConfig,
    ThreeSeriesConfig, WaveletConfig, Weak11Config,
};
pub use cz::{run_cz_sweep, CzFamily, CzReport, CzRow};
pub use identity::{run_haar_identity, HaarIdentityReport, IdentityRow};
pub use operator::{
    run_operator_bound, run_weak11, OperatorBoundReport, OperatorNormRow, ProbeRow, Weak11Report,
};
pub use report::{emit_report, num, Outcome, Summary, Table, SCHEMA_VERSION};
pub use series::{run_three_series, SeriesCell, ThreeSeriesSuiteReport};

/// Experiments addressable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    HaarIdentity,
    CzSweep,
    ConcentrationSmooth,
    ConcentrationHaar,
    ConcentrationOperator,
    ThreeSeries,
    OperatorBound,
    Weak11,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::HaarIdentity,
        ExperimentKind::CzSweep,
        ExperimentKind::ConcentrationHaar,
        ExperimentKind::ConcentrationSmooth,
        ExperimentKind::ConcentrationOperator,
        ExperimentKind::ThreeSeries,
        ExperimentKind::OperatorBound,
        ExperimentKind::Weak11,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::HaarIdentity => "haar-identity",
            ExperimentKind::CzSweep => "cz-sweep",
            ExperimentKind::ConcentrationSmooth => "concentration-smooth",
            ExperimentKind::ConcentrationHaar => "concentration-haar",
            ExperimentKind::ConcentrationOperator => "concentration-operator",
            ExperimentKind::ThreeSeries => "three-series",
            ExperimentKind::OperatorBound => "operator-bound",
            ExperimentKind::Weak11 => "weak11",
        }
    }

    pub fn run(&self, config: &ExperimentConfig) -> Result<Outcome> {
        config.validate()?;
        Ok(match self {
            ExperimentKind::HaarIdentity => run_haar_identity(config)?.outcome(),
            ExperimentKind::CzSweep => run_cz_sweep(config)?.outcome(),
            ExperimentKind::ConcentrationSmooth => run_concentration_smooth(config)?.outcome(),
            ExperimentKind::ConcentrationHaar => run_concentration_haar(config)?.outcome(),
            ExperimentKind::ConcentrationOperator => run_concentration_operator(config)?.outcome(),
            ExperimentKind::ThreeSeries => run_three_series(config)?.outcome(),
            ExperimentKind::OperatorBound => run_operator_bound(config)?.outcome(),
            ExperimentKind::Weak11 => run_weak11(config)?.outcome(),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment {s:?}")))
    }
}

/// Runs the given experiments in order and assembles the summary.
pub fn run_experiments(
    config: &ExperimentConfig,
    kinds: &[ExperimentKind],
) -> Result<(Summary, Vec<Outcome>)> {
    let outcomes = kinds
        .iter()
        .map(|k| k.run(config))
        .collect::<Result<Vec<_>>>()?;
    Ok((Summary::new(config, &outcomes), outcomes))
}

/// Every experiment.
pub fn run_suite(config: &ExperimentConfig) -> Result<(Summary, Vec<Outcome>)> {
    run_experiments(config, &ExperimentKind::ALL)
}

/// Auxiliary stream for choosing points and test functions. Coefficient
/// streams never use scale `i32::MIN`, so the two cannot collide.
pub(crate) fn aux_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(
        SeedPath {
            master_seed: seed,
            replicate: stream,
            j: i32::MIN,
            k: 0,
        }
        .key(),
    )
}

/// A master seed for one experiment cell.
pub(crate) fn cell_seed(seed: u64, tag: u64, index: u64) -> u64 {
    aux_rng(seed, tag.wrapping_mul(1 << 32).wrapping_add(index)).random()
}

/// Two distinct dyadic rationals in `[0, 2)` with at most `max_depth` binary digits.
pub(crate) fn random_dyadic_pair(rng: &mut ChaCha8Rng, max_depth: u32) -> (f64, f64) {
    loop {
        let depth = rng.random_range(1..=max_depth) as i32;
        let top = 1u64 << (depth + 1);
        let (a, b) = (rng.random_range(0..top), rng.random_range(0..top));
        if a != b {
            return (a as f64 * pow2(-depth), b as f64 * pow2(-depth));
        }
    }
}

/// `true` when `bound` dominates a Wilson upper limit, or when the bound
/// is zero and no exceedance was observed.
pub(crate) fn tail_check(successes: u64, upper: f64, bound: f64) -> bool {
    if bound == 0.0 {
        successes == 0
    } else {
        upper <= bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip_through_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn dyadic_pairs_are_distinct_and_exact() {
        let mut rng = aux_rng(1, 2);
        for _ in 0..200 {
            let (x, y) = random_dyadic_pair(&mut rng, 16);
            assert_ne!(x, y);
            assert!((x * 65536.0).fract() == 0.0 && x < 2.0);
        }
    }
}
