use criterion::{criterion_group, criterion_main, Criterion};

use congamma_core::policy::PrecisionPolicy;
use congamma_core::propagator::PiecewisePotential;

fn bench_identity(c: &mut Criterion) {
    let policy = PrecisionPolicy::with_digits(20).unwrap();
    c.bench_function("integer_count_1e4", |b| {
        b.iter(|| congamma_core::counting::integer_count(std::hint::black_box(1e4), &policy).unwrap())
    });
}

fn bench_pi1(c: &mut Criterion) {
    let policy = PrecisionPolicy::default();
    c.bench_function("pi1_bar_1e6", |b| {
        b.iter(|| {
            congamma_core::counting::pi1_bar(
                std::hint::black_box(1e6),
                &policy,
                &Default::default(),
            )
            .unwrap()
        })
    });
}

fn bench_goldbach(c: &mut Criterion) {
    let policy = PrecisionPolicy::default();
    c.bench_function("straddle_density_1e6", |b| {
        b.iter(|| {
            congamma_core::goldbach::straddle_density(1, std::hint::black_box(1e6), &policy)
                .unwrap()
        })
    });
}

fn bench_sieve(c: &mut Criterion) {
    c.bench_function("primes_up_to_1e6", |b| {
        b.iter(|| congamma_core::sieve::primes_up_to(std::hint::black_box(1_000_000)).unwrap())
    });
}

fn bench_c2i_sweep(c: &mut Criterion) {
    c.bench_function("c2i_raw_interval_one_segment", |b| {
        b.iter(|| {
            congamma_core::sieve::c2i_raw_interval(
                std::hint::black_box(1_000_000),
                std::hint::black_box(2_000_000),
            )
        })
    });
}

fn bench_green_recursion(c: &mut Criterion) {
    let pot = PiecewisePotential::new(vec![-0.5, 0.7], vec![0.0, 1.1, 0.3]).unwrap();
    c.bench_function("path_decomposition_depth_40", |b| {
        b.iter(|| {
            congamma_core::propagator::path_decomposition_green(
                &pot,
                std::hint::black_box(2.0),
                -1.2,
                1.4,
                40,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_identity,
    bench_pi1,
    bench_goldbach,
    bench_sieve,
    bench_c2i_sweep,
    bench_green_recursion
);
criterion_main!(benches);
