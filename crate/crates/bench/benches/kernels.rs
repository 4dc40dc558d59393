use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wavesum::operator::{analyze, realize, Part};
use wavesum::{CoefficientModel, KernelJob, PreparedPair, Realization, WaveletFamily};
use wavesum_bench::{test_function, PAIR};

fn expansion(c: &mut Criterion) {
    let job = KernelJob::default();
    let mut g = c.benchmark_group("expand_pair");
    for w in [WaveletFamily::haar(), WaveletFamily::meyer()] {
        g.bench_function(w.name().to_string(), |b| {
            b.iter(|| {
                w.expand_pair(black_box(PAIR.0), black_box(PAIR.1), &job, false)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let job = KernelJob::default();
    let model = CoefficientModel::gaussian(1.0);
    let mut g = c.benchmark_group("centered_kernel_draw");
    for w in [WaveletFamily::haar(), WaveletFamily::meyer()] {
        let pair = PreparedPair::new(&w, &model, PAIR.0, PAIR.1, &job, false).unwrap();
        let mut r = 0;
        g.bench_function(w.name().to_string(), |b| {
            b.iter(|| {
                r += 1;
                pair.centered(&Realization::new(1, r)).value
            })
        });
    }
    g.finish();
}

fn pyramid(c: &mut Criterion) {
    let haar = WaveletFamily::haar();
    let job = KernelJob::default();
    let model = CoefficientModel::rademacher();
    let mut g = c.benchmark_group("haar_operator");
    for depth in [10, 14] {
        let f = test_function(depth);
        g.bench_with_input(BenchmarkId::new("analyze", depth), &f, |b, f| {
            b.iter(|| analyze(&haar, f, &job).unwrap())
        });
        let coeffs = analyze(&haar, &f, &job).unwrap();
        g.bench_with_input(BenchmarkId::new("realize", depth), &coeffs, |b, c| {
            b.iter(|| realize(&haar, c, &model, &Realization::new(2, 0), Part::Full))
        });
    }
    g.finish();
}

criterion_group!(benches, expansion, sampling, pyramid);
criterion_main!(benches);
