use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndv_bench::{zipf_column, zipf_profile};
use ndv_core::estimators::{estimate, estimate_all};
use ndv_core::profiles::{frequency_profile, random_sample, sequential_sample};
use ndv_core::{Method, SolverConfig};

fn estimators(c: &mut Criterion) {
    let solver = SolverConfig::default();
    let mut group = c.benchmark_group("estimator");
    for n in [100, 1_000, 10_000] {
        let profile = zipf_profile(100_000, n, 1);
        for method in Method::ALL {
            group.bench_with_input(BenchmarkId::new(method.name(), n), &profile, |b, p| {
                b.iter(|| estimate(method, p, &solver))
            });
        }
        group.bench_with_input(BenchmarkId::new("all", n), &profile, |b, p| {
            b.iter(|| estimate_all(p, &solver))
        });
    }
    group.finish();
}

fn profiles(c: &mut Criterion) {
    let column = zipf_column(100_000, 50_000, 1.1, 2);
    let mut group = c.benchmark_group("profile");
    for n in [100, 10_000] {
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| frequency_profile(&sequential_sample(&column, n).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("random", n), &n, |b, &n| {
            b.iter(|| frequency_profile(&random_sample(&column, n, 3).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, estimators, profiles);
criterion_main!(benches);
