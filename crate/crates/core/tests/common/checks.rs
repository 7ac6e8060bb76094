use std::collections::HashSet;

use ndv_core::corpus::ColumnData;
use ndv_core::estimators::{estimate_all, Method};
use ndv_core::eval::{layout_experiment, percentile, q_error};
use ndv_core::profiles::{frequency_profile, random_sample, sequential_sample, Sample};
use ndv_core::SolverConfig;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Check;

fn column_strategy() -> impl Strategy<Value = (Vec<u16>, usize, bool, u64)> {
    (1usize..400, 1u16..200).prop_flat_map(|(len, alphabet)| {
        (
            proptest::collection::vec(0..alphabet, len),
            0..=len,
            any::<bool>(),
            any::<u64>(),
        )
    })
}

fn identities(values: &[u16], n: usize, random: bool, seed: u64) -> Result<(), TestCaseError> {
    let column = ColumnData::new(values.iter().map(|v| format!("x{v}")).collect());
    let sample = if random {
        random_sample(&column, n, seed).unwrap()
    } else {
        sequential_sample(&column, n).unwrap()
    };
    let profile = frequency_profile(&sample);
    let by_j: u64 = profile.iter().map(|(j, f)| j * f).sum();
    let by_f: u64 = profile.iter().map(|(_, f)| f).sum();
    let distinct = sample.items.iter().collect::<HashSet<_>>().len() as u64;
    prop_assert_eq!(profile.n(), sample.len() as u64);
    prop_assert_eq!(by_j, profile.n());
    prop_assert_eq!(by_f, profile.d());
    prop_assert_eq!(profile.d(), distinct);
    prop_assert_eq!(profile.population(), values.len() as u64);

    let mut items = sample.items.clone();
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
    let shuffled = Sample {
        items,
        ..sample.clone()
    };
    let permuted = frequency_profile(&shuffled);
    prop_assert_eq!(&permuted, &profile);
    let solver = SolverConfig::default();
    let a = estimate_all(&profile, &solver);
    let b = estimate_all(&permuted, &solver);
    for (x, y) in a.iter().zip(&b) {
        let same = match (x.estimate(), y.estimate()) {
            (Some(x), Some(y)) => x.value.to_bits() == y.value.to_bits(),
            (None, None) => true,
            _ => false,
        };
        prop_assert!(same, "{:?} vs {:?}", x, y);
    }
    Ok(())
}

/// `n = Σ j·f_j`, `d = Σ f_j` and order invariance over random columns.
pub fn profile_identities(cases: u32) -> Check {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&column_strategy(), |(values, n, random, seed)| {
            identities(&values, n, random, seed)
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random columns and samples"))
}

pub fn q_error_metric() -> Check {
    let mut failures = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if got.to_bits() != want.to_bits() {
            failures.push(format!("{name}: got {got}, want {want}"));
        }
    };
    let mut below_one = Vec::new();
    expect("q(10,5)", q_error(10.0, 5.0).unwrap(), 2.0);
    expect("q(5,10)", q_error(5.0, 10.0).unwrap(), 2.0);
    expect("q(D,D)", q_error(37.0, 37.0).unwrap(), 1.0);
    expect("q(-2,3)", q_error(-2.0, 3.0).unwrap(), f64::INFINITY);
    expect("q(0,3)", q_error(0.0, 3.0).unwrap(), f64::INFINITY);
    expect("q(inf,3)", q_error(f64::INFINITY, 3.0).unwrap(), f64::INFINITY);
    for d in [1.0, 3.0, 1e6] {
        expect("q(2D,D)", q_error(2.0 * d, d).unwrap(), 2.0);
        expect("q(D,2D)", q_error(d, 2.0 * d).unwrap(), 2.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        use rand::Rng;
        let d = rng.random_range(1..1_000_000) as f64;
        let e = rng.random_range(-1e6..1e7);
        let q = q_error(e, d).unwrap();
        if !(q >= 1.0) {
            below_one.push(format!("q({e},{d}) = {q} < 1"));
        }
    }
    let ten: Vec<f64> = (1..=10).map(f64::from).collect();
    expect("p90([1..10])", percentile(&ten, 90.0).unwrap(), 9.0);
    expect("p37([5])", percentile(&[5.0], 37.0).unwrap(), 5.0);
    expect(
        "p99([1,2,inf])",
        percentile(&[1.0, 2.0, f64::INFINITY], 99.0).unwrap(),
        f64::INFINITY,
    );
    failures.extend(below_one);
    if q_error(1.0, 0.0).is_ok() {
        failures.push("D < 1 accepted".into());
    }
    if percentile(&[], 50.0).is_ok() {
        failures.push("empty percentile accepted".into());
    }
    if failures.is_empty() {
        Ok("symmetry, floor at 1, +inf policy and nearest-rank fixtures".into())
    } else {
        Err(failures.join("; "))
    }
}

pub fn layout() -> Check {
    let started = std::time::Instant::now();
    let series = layout_experiment(7, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let complete = series.points.len() == 101
        && series
            .points
            .iter()
            .all(|p| p.entries.len() == Method::ALL.len() && p.entries.iter().all(|e| e.q.is_some()));
    let chao0 = series.q(0, Method::Chao);
    let (gee0, gee100) = (series.q(0, Method::Gee), series.q(100, Method::Gee));
    let secs = started.elapsed().as_secs_f64();
    let summary = format!(
        "D at k=0 {}, Chao q at k=0 {chao0:?}, GEE q {gee0:?} -> {gee100:?}, {secs:.1}s",
        series.points[0].d
    );
    let gee_drops = matches!((gee0, gee100), (Some(a), Some(b)) if b < a);
    if complete && series.points[0].d == 7000 && chao0 == Some(7000.0) && gee_drops && secs < 60.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}
