use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndv_bench::model_input;
use ndv_core::model::{loss_and_gradients, predict_log, ModelConfig};

fn inference(c: &mut Criterion) {
    let config = ModelConfig::default();
    let mut group = c.benchmark_group("predict");
    for t in [1, 5, 20] {
        let (params, input) = model_input(&config, t, 1);
        group.bench_with_input(BenchmarkId::from_parameter(t), &input, |b, input| {
            b.iter(|| predict_log(&params, &config, input).unwrap())
        });
    }
    group.finish();
}

fn backward(c: &mut Criterion) {
    let config = ModelConfig::default();
    let mut group = c.benchmark_group("loss_and_gradients");
    group.sample_size(20);
    for t in [1, 5, 20] {
        let (params, input) = model_input(&config, t, 2);
        let truths = vec![100.0; t];
        group.bench_with_input(BenchmarkId::from_parameter(t), &input, |b, input| {
            b.iter(|| loss_and_gradients(&params, &config, &[input], &[truths.as_slice()], None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, inference, backward);
criterion_main!(benches);
