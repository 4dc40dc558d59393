//! Counter-based coefficient streams and Monte Carlo checks of the
//! subgaussian calculus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CoefficientModel, Distribution};
use crate::dyadic::DyadicIndex;
use crate::error::{Error, Result};
use crate::stats::{par_chunked, McEstimate, Moments};

/// Largest `|lambda| sqrt(nu)` accepted by [`empirical_log_mgf`]; beyond it
/// `exp(lambda X)` is dominated by rare draws and the estimate is useless.
pub const MAX_SCALED_LAMBDA: f64 = 10.0;

/// Address of one random draw: a stateless function of all four fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub master_seed: u64,
    pub replicate: u64,
    pub j: i32,
    pub k: i64,
}

impl SeedPath {
    pub fn new(master_seed: u64, replicate: u64, i: DyadicIndex) -> Self {
        SeedPath {
            master_seed,
            replicate,
            j: i.j,
            k: i.k,
        }
    }

    pub fn index(&self) -> DyadicIndex {
        DyadicIndex::new(self.j, self.k)
    }

    /// The 256-bit ChaCha key `master_seed || replicate || j || k`.
    pub fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replicate.to_le_bytes());
        key[16..24].copy_from_slice(&i64::from(self.j).to_le_bytes());
        key[24..].copy_from_slice(&self.k.to_le_bytes());
        key
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}

/// One realization `omega`: every coefficient is re-derived on demand from
/// `(master_seed, replicate, I)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Realization {
    pub master_seed: u64,
    pub replicate: u64,
}

impl Realization {
    pub fn new(master_seed: u64, replicate: u64) -> Self {
        Realization {
            master_seed,
            replicate,
        }
    }

    pub fn path(&self, i: DyadicIndex) -> SeedPath {
        SeedPath::new(self.master_seed, self.replicate, i)
    }
}

impl CoefficientModel {
    /// One draw of the centered fluctuation `a_I - E a_I`.
    pub fn sample_fluctuation<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.dist {
            Distribution::Gaussian { nu } => nu.sqrt() * rng.sample::<f64, _>(StandardNormal),
            Distribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::BoundedUniform { a, b } => {
                let h = 0.5 * (b - a);
                rng.random_range(-h..h)
            }
            Distribution::TruncatedGaussian { bound } => sample_truncated_normal(rng, bound),
            Distribution::Constant => 0.0,
        }
    }

    /// The fluctuation stored at `path`.
    pub fn fluctuation_at(&self, path: &SeedPath) -> f64 {
        if self.dist == Distribution::Constant {
            return 0.0;
        }
        self.sample_fluctuation(&mut path.rng())
    }
}

/// Standard normal conditioned on `[-bound, bound]`, by rejection.
fn sample_truncated_normal<R: Rng>(rng: &mut R, bound: f64) -> f64 {
    if bound < 1.0 {
        // Uniform proposal, acceptance exp(-x^2 / 2) >= exp(-1/2).
        loop {
            let x = rng.random_range(-bound..bound);
            if rng.random::<f64>() < (-0.5 * x * x).exp() {
                return x;
            }
        }
    } else {
        // Acceptance probability is at least P{|Z| <= 1} > 0.68.
        loop {
            let x: f64 = rng.sample(StandardNormal);
            if x.abs() <= bound {
                return x;
            }
        }
    }
}

/// One draw of `a_I` at `I = (path.j, path.k)`.
pub fn sample_coefficient(model: &CoefficientModel, path: &SeedPath) -> f64 {
    model.mean_at(path.index()) + model.fluctuation_at(path)
}

fn scalar_path(seed: u64, replicate: u64, slot: i64) -> SeedPath {
    SeedPath {
        master_seed: seed,
        replicate,
        j: 0,
        k: slot,
    }
}

/// Monte Carlo estimate of `log E exp(lambda (X - EX))`.
pub fn empirical_log_mgf(
    model: &CoefficientModel,
    lambda: f64,
    n: u64,
    seed: u64,
    confidence: f64,
) -> Result<McEstimate> {
    if n < 1000 {
        return Err(Error::invalid(format!(
            "log-MGF estimate needs n >= 1000, got {n}"
        )));
    }
    let spread = model.nu().max(model.variance()).sqrt();
    if !lambda.is_finite() || lambda.abs() * spread > MAX_SCALED_LAMBDA {
        return Err(Error::Overflow(format!(
            "lambda = {lambda} exceeds the supported range |lambda| sqrt(nu) <= {MAX_SCALED_LAMBDA}"
        )));
    }
    if lambda == 0.0 {
        return Ok(McEstimate {
            mean: 0.0,
            std_error: 0.0,
            n,
            ci_low: 0.0,
            ci_high: 0.0,
        });
    }
    let m = par_chunked(
        n,
        Moments::default,
        |acc, r| {
            let x = model.fluctuation_at(&scalar_path(seed, r, 0));
            acc.push((lambda * x).exp());
        },
        |acc, part| acc.merge(part),
    )
    .estimate(confidence);
    let floor = f64::MIN_POSITIVE;
    Ok(m.map_monotone(|v| v.max(floor).ln(), 1.0 / m.mean))
}

/// Wilson estimates of `P{|X - EX| > t}` for each `t`, from one set of draws.
pub fn empirical_two_sided_tail(
    model: &CoefficientModel,
    ts: &[f64],
    n: u64,
    seed: u64,
    confidence: f64,
) -> Vec<McEstimate> {
    let counts = par_chunked(
        n,
        || vec![0u64; ts.len()],
        |acc, r| {
            let x = model.fluctuation_at(&scalar_path(seed, r, 0)).abs();
            for (c, &t) in acc.iter_mut().zip(ts) {
                if x > t {
                    *c += 1;
                }
            }
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    );
    counts
        .into_iter()
        .map(|c| McEstimate::wilson(c, n, confidence))
        .collect()
}

/// Estimates of `E S^(2k)` for the independent sum `S` of the centered
/// components, for each requested `k`.
pub fn empirical_sum_central_moments(
    components: &[CoefficientModel],
    ks: &[u32],
    n: u64,
    seed: u64,
    confidence: f64,
) -> Result<Vec<McEstimate>> {
    if components.is_empty() {
        return Err(Error::invalid(
            "an independent sum needs at least one component",
        ));
    }
    if ks.contains(&0) {
        return Err(Error::invalid("moment order k must be at least 1"));
    }
    let moments = par_chunked(
        n,
        || vec![Moments::default(); ks.len()],
        |acc, r| {
            let s: f64 = components
                .iter()
                .enumerate()
                .map(|(i, m)| m.fluctuation_at(&scalar_path(seed, r, i as i64)))
                .sum();
            for (m, &k) in acc.iter_mut().zip(ks) {
                m.push(s.powi(2 * k as i32));
            }
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| a.merge(b)),
    );
    Ok(moments.iter().map(|m| m.estimate(confidence)).collect())
}
