//! Acceptance criteria. Each prints one PASS or FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavesum::experiments::{
    run_concentration_haar, run_cz_sweep, run_haar_identity, run_operator_bound, run_suite,
    run_three_series, ExperimentConfig,
};
use wavesum::randkernel::{sample_kernel, sample_kernel_dx, PreparedPair};
use wavesum::stats::{bonferroni, mc_mean};
use wavesum::subgauss::{
    empirical_sum_central_moments, empirical_two_sided_tail, moment_bound, Verdict,
};
use wavesum::{
    dyadic_distance, CoefficientModel, DyadicPoint, KernelJob, Realization, Result, WaveletFamily,
};

const SEED: u64 = 20240917;
const CONFIDENCE: f64 = 0.99;

struct Check {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Check> {
    Ok(Check {
        passed,
        detail: detail.into(),
    })
}

fn haar_identity() -> Result<Check> {
    let r = run_haar_identity(&ExperimentConfig::default())?;
    verdict(
        r.identity_passed && r.rows.len() == 500,
        format!(
            "{} pairs, max relative error {:.2e} (tol 1e-12)",
            r.rows.len(),
            r.max_rel_err
        ),
    )
}

fn haar_regularity() -> Result<Check> {
    let r = run_haar_identity(&ExperimentConfig::default())?;
    let checks = r.triples as u64 * r.realizations;
    verdict(
        r.regularity_passed && r.triples == 1000 && r.realizations == 10,
        format!(
            "{checks} checks, {} triples with a mismatch",
            r.regularity_failures
        ),
    )
}

fn subgaussian_tails() -> Result<Check> {
    let models = [
        CoefficientModel::gaussian(1.0),
        CoefficientModel::gaussian(0.25),
        CoefficientModel::rademacher(),
        CoefficientModel::bounded_uniform(-1.0, 1.0),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (i, m) in models.iter().enumerate() {
        let nu = m.nu();
        let ts: Vec<f64> = [0.5, 1.0, 1.5, 2.0, 2.5]
            .iter()
            .map(|c| c * nu.sqrt())
            .collect();
        let est = empirical_two_sided_tail(m, &ts, 1_000_000, SEED + i as u64, CONFIDENCE);
        for (e, &t) in est.iter().zip(&ts) {
            let bound = 2.0 * (-(t * t) / (2.0 * nu)).exp();
            ok &= e.ci_high <= bound;
            worst = worst.max(e.ci_high / bound);
        }
    }
    verdict(
        ok,
        format!(
            "{} models x 5 levels, max upper/bound = {worst:.3}",
            models.len()
        ),
    )
}

fn moment_bounds() -> Result<Check> {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (i, &nu) in [0.5, 1.0, 2.0].iter().enumerate() {
        let components: Vec<_> = [0.1, 0.2, 0.3, 0.4]
            .iter()
            .map(|w| CoefficientModel::gaussian(w * nu))
            .collect();
        let ks = [1, 2, 3, 4];
        let est = empirical_sum_central_moments(
            &components,
            &ks,
            1_000_000,
            SEED + 10 + i as u64,
            CONFIDENCE,
        )?;
        for (e, &k) in est.iter().zip(&ks) {
            let bound = moment_bound(nu, k)?;
            let rel_se = e.std_error / e.mean;
            ok &= e.mean <= bound * (1.0 + 5.0 * rel_se);
            worst = worst.max(e.mean / bound);
        }
    }
    verdict(
        ok,
        format!("nu in {{0.5, 1, 2}}, k = 1..4, max moment/bound = {worst:.3}"),
    )
}

fn random_dyadic(rng: &mut ChaCha8Rng, depth: i32) -> f64 {
    rng.random_range(0..1u64 << depth) as f64 / (1u64 << depth) as f64
}

fn kernel_second_moment() -> Result<Check> {
    let haar = WaveletFamily::haar();
    let model = CoefficientModel::gaussian(1.0);
    let job = KernelJob::default();
    let pairs = 50;
    let conf = bonferroni(CONFIDENCE, pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut bound_ok, mut exact_ok) = (0, 0);
    for p in 0..pairs {
        let (x, y) = loop {
            let (x, y) = (random_dyadic(&mut rng, 12), random_dyadic(&mut rng, 12));
            if x != y {
                break (x, y);
            }
        };
        let delta = dyadic_distance(DyadicPoint::from_f64(x, 12)?, DyadicPoint::from_f64(y, 12)?);
        let pair = PreparedPair::new(&haar, &model, x, y, &job, false)?;
        let est = mc_mean(10_000, conf, |r| {
            pair.centered(&Realization::new(SEED + p as u64, r))
                .value
                .powi(2)
        });
        let s = 4.0 / 3.0 / (delta * delta);
        bound_ok += usize::from(est.mean <= 8.0 * model.nu() * s + 3.0 * est.half_width());
        exact_ok += usize::from(est.contains(model.variance() * s));
    }
    verdict(
        bound_ok == pairs && exact_ok == pairs,
        format!("{bound_ok}/{pairs} under 8 nu S, {exact_ok}/{pairs} exact inside simultaneous CI"),
    )
}

fn operator_bound() -> Result<Check> {
    let r = run_operator_bound(&ExperimentConfig::default())?;
    let within = r.rows.iter().filter(|row| row.within_bound).count();
    let max_ratio = r
        .rows
        .iter()
        .map(|row| row.norm.estimate.mean / row.norm.certified_bound)
        .fold(0.0, f64::max);
    verdict(
        within == r.rows.len() && r.rows.len() == 20,
        format!(
            "{within}/{} functions within the bound, max estimate/bound = {max_ratio:.3}",
            r.rows.len()
        ),
    )
}

fn cz_sweeps() -> Result<Check> {
    let r = run_cz_sweep(&ExperimentConfig::default())?;
    let slopes: Vec<String> = r
        .families
        .iter()
        .map(|f| format!("{} {:.3}", f.name, f.slope))
        .collect();
    verdict(r.passed(), format!("slopes: {}", slopes.join(", ")))
}

fn concentration() -> Result<Check> {
    let r = run_concentration_haar(&ExperimentConfig::default())?;
    let ok = r.cells.iter().filter(|c| c.passed).count();
    verdict(
        r.passed() && r.cells.len() == 6 && r.replicates == 1_000_000,
        format!(
            "{ok}/{} cells with Wilson upper <= sharp bound",
            r.cells.len()
        ),
    )
}

fn three_series() -> Result<Check> {
    let r = run_three_series(&ExperimentConfig::default())?;
    let worst = r
        .cells
        .iter()
        .flat_map(|c| c.certificate.tail_bounds)
        .fold(0.0, f64::max);
    let all = r.cells.iter().all(|c| {
        c.certificate.verdict == Verdict::CertifiedConvergent
            && c.certificate.tail_bounds.iter().all(|&b| b < 1e-8)
    });
    verdict(
        all && r.cells.len() == 2 * 2 * 20 * 3,
        format!(
            "{}/{} cells certified, largest remainder {worst:.2e}",
            r.certified,
            r.cells.len()
        ),
    )
}

fn gradient_consistency() -> Result<Check> {
    let w = WaveletFamily::meyer();
    let model = CoefficientModel::gaussian(1.0);
    let job = KernelJob::new(-4, 12, 1e-10)?;
    let h = 2f64.powi(-28);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: f64 = rng.random();
        let y = x + rng.random_range(0.01..0.5);
        let omega = Realization::new(rng.random(), rng.random_range(0..1000));
        let dx = sample_kernel_dx(&w, &model, x, y, &job, &omega)?.value;
        let plus = sample_kernel(&w, &model, x + h, y, &job, &omega)?.value;
        let minus = sample_kernel(&w, &model, x - h, y, &job, &omega)?.value;
        let fd = (plus - minus) / (2.0 * h);
        let scale = PreparedPair::new(&w, &model, x, y, &job, true)?
            .centered_dx_second_moment()?
            .sqrt()
            .max(dx.abs());
        worst = worst.max((fd - dx).abs() / scale);
    }
    verdict(
        worst <= 1e-4,
        format!("100 (pair, path) samples, max relative error {worst:.2e} at h = 2^-28"),
    )
}

fn determinism() -> Result<Check> {
    let mut config = ExperimentConfig {
        replicates: Some(1000),
        ..Default::default()
    };
    config.haar_identity.pairs = 50;
    config.haar_identity.triples = 50;
    config.operator.functions = 3;
    config.operator.depth = 10;
    config.three_series.pairs = 3;
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| run_suite(&config))
            .map(|(summary, _)| summary.canonical_json())
    };
    let (a, b) = (run(1)?, run(3)?);
    verdict(
        a == b,
        format!(
            "1 and 3 threads, {} bytes of JSON, identical: {}",
            a.len(),
            a == b
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Result<Check>);

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        ("haar identity", s(1), haar_identity),
        ("haar regularity degeneracy", s(5), haar_regularity),
        ("subgaussian tails", s(120), subgaussian_tails),
        ("moment bounds", s(60), moment_bounds),
        ("kernel second moment", s(120), kernel_second_moment),
        ("operator bound", s(120), operator_bound),
        ("cz sweeps", s(300), cz_sweeps),
        ("haar concentration", s(180), concentration),
        ("three-series certificates", s(60), three_series),
        ("gradient consistency", s(30), gradient_consistency),
        ("determinism", s(600), determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(v) => (v.passed && elapsed <= *limit, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2}s, limit {}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
