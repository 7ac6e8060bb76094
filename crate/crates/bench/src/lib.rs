//! Seeded inputs shared by the benchmarks.

use ndarray::Array2;
use ndv_core::model::{ColumnFeatures, ModelConfig, ModelParams, TableInput};
use ndv_core::profiles::{frequency_profile, sequential_sample, FrequencyProfile};
use ndv_core::ColumnData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

/// `rows` values drawn from a Zipf law over `distinct` values.
pub fn zipf_column(rows: usize, distinct: u64, exponent: f64, seed: u64) -> ColumnData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(distinct as f64, exponent).expect("valid zipf parameters");
    ColumnData::new(
        (0..rows)
            .map(|_| format!("v{}", zipf.sample(&mut rng) as u64))
            .collect(),
    )
}

/// Profile of the first `n` rows of a Zipf column with `population` rows.
pub fn zipf_profile(population: usize, n: usize, seed: u64) -> FrequencyProfile {
    let column = zipf_column(population, population as u64 / 2, 1.1, seed);
    let sample = sequential_sample(&column, n).expect("n fits the column");
    frequency_profile(&sample)
}

/// Random parameters and a `t`-column input for `config`.
pub fn model_input(config: &ModelConfig, t: usize, seed: u64) -> (ModelParams, TableInput) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ModelParams::init(config, &mut rng);
    let x = Array2::from_shape_fn((t, config.l), |_| rng.random_range(-1.0..1.0));
    let columns = (0..t)
        .map(|_| ColumnFeatures {
            population: rng.random_range(1_000..1_000_000),
            profile: (0..config.profile_len())
                .map(|_| rng.random_range(0..50) as f64)
                .collect(),
        })
        .collect();
    (params, TableInput { x, columns })
}
