use std::time::Instant;

use ndarray::Array2;
use ndv_core::corpus::{split_dataset, EmptyCells, SplitRatios};
use ndv_core::eval::synthetic::{semantic_corpus, SyntheticSpec, SyntheticTable};
use ndv_core::eval::{percentile, run_benchmark, BenchmarkContext, BenchmarkSpec, EvalTable, LearnedModel, MethodId};
use ndv_core::model::{
    activation_pattern, loss_and_gradients, predict_log, prepare_tables, train, Ablation, ColumnFeatures, ModelConfig,
    ModelParams, PreparedTable, ProfileAccess, TableInput, TrainConfig,
};
use ndv_core::profiles::{AccessMode, SampleSize};
use ndv_core::semantics::TestEmbedder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Check;

pub fn random_input(config: &ModelConfig, t: usize, rng: &mut ChaCha8Rng) -> TableInput {
    TableInput {
        x: Array2::from_shape_fn((t, config.l), |_| rng.random_range(-1.0..1.0)),
        columns: (0..t)
            .map(|_| ColumnFeatures {
                population: rng.random_range(1..100_000),
                profile: (0..config.profile_len())
                    .map(|_| {
                        if rng.random_bool(0.4) {
                            rng.random_range(0..20) as f64
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn grad_config(heads: usize, l: usize, use_stats: bool, layer_norm: bool) -> ModelConfig {
    ModelConfig {
        l,
        heads,
        layers: 1,
        k: 6,
        use_stats,
        hidden: vec![16, 8],
        layer_norm,
        ..ModelConfig::default()
    }
}

/// Denominator floor of the relative error. Central differences with
/// `h = 1e-5` carry about 1e-9 of absolute rounding noise.
pub const REL_FLOOR: f64 = 1e-4;

pub struct GradStats {
    pub max_rel: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// Analytic gradient against central differences on every coordinate.
/// Coordinates whose perturbation flips a ReLU gate are skipped.
pub fn gradient_check_one(config: &ModelConfig, t: usize, seed: u64) -> GradStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ModelParams::init(config, &mut rng);
    let input = random_input(config, t, &mut rng);
    let truths: Vec<f64> = (0..t).map(|_| rng.random_range(1.0..500.0f64).round()).collect();
    let (_, grads) = loss_and_gradients(&params, config, &[&input], &[&truths], None).unwrap();
    let base = activation_pattern(&params, config, &input).unwrap();
    let loss_at = |p: &ModelParams| {
        let logs = predict_log(p, config, &input).unwrap();
        logs.iter().zip(&truths).map(|(a, d)| (a - d.ln()).powi(2)).sum::<f64>() / t as f64
    };
    let mut stats = GradStats {
        max_rel: 0.0,
        checked: 0,
        skipped: 0,
    };
    let analytic: Vec<(String, Vec<f64>)> = grads.blocks().into_iter().map(|(n, g)| (n, g.to_vec())).collect();
    let mut probe = params.clone();
    for (b, (_, g)) in analytic.iter().enumerate() {
        for i in 0..g.len() {
            let theta = probe.blocks()[b].1[i];
            let h = 1e-5 * theta.abs().max(1.0);
            let mut eval = |v: f64| {
                probe.blocks_mut()[b].1[i] = v;
                let same = activation_pattern(&probe, config, &input).unwrap() == base;
                (loss_at(&probe), same)
            };
            let (up, same_up) = eval(theta + h);
            let (down, same_down) = eval(theta - h);
            probe.blocks_mut()[b].1[i] = theta;
            if !(same_up && same_down) {
                stats.skipped += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * h);
            let rel = (g[i] - numeric).abs() / g[i].abs().max(numeric.abs()).max(REL_FLOOR);
            stats.max_rel = stats.max_rel.max(rel);
            stats.checked += 1;
        }
    }
    stats
}

pub fn gradient_check() -> Check {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let (mut checked, mut skipped, mut runs) = (0, 0, 0);
    let mut failures = Vec::new();
    for seed in 0..10u64 {
        for heads in [1, 2, 4] {
            for l in [8, 16] {
                for t in [1, 2, 5] {
                    for use_stats in [true, false] {
                        let cfg = grad_config(heads, l, use_stats, false);
                        let s = gradient_check_one(&cfg, t, seed * 1000 + runs);
                        runs += 1;
                        worst = worst.max(s.max_rel);
                        checked += s.checked;
                        skipped += s.skipped;
                        if s.max_rel >= 1e-4 {
                            failures.push(format!(
                                "H={heads} l={l} t={t} stats={use_stats} seed={seed}: {:.2e}",
                                s.max_rel
                            ));
                        }
                    }
                }
            }
        }
    }
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    if skipped * 100 >= checked + skipped {
        return Err(format!(
            "{skipped} of {} coordinates crossed a ReLU kink",
            checked + skipped
        ));
    }
    Ok(format!(
        "{runs} configurations, {checked} coordinates, max relative error {worst:.2e}, {skipped} kink skips, {:.1}s",
        started.elapsed().as_secs_f64()
    ))
}

/// Same check with per-row layer normalization enabled.
pub fn gradient_check_layer_norm() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..4u64 {
        for heads in [1, 2, 4] {
            let s = gradient_check_one(&grad_config(heads, 8, true, true), 3, 77 + seed);
            worst = worst.max(s.max_rel);
        }
    }
    if worst < 1e-4 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e}"))
    }
}

pub fn equivariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let heads = [1, 2, 4, 8][case % 4];
        let cfg = ModelConfig {
            l: 16,
            heads,
            layers: 1 + case % 2,
            k: 10,
            hidden: vec![24, 12],
            use_stats: case % 3 != 0,
            ..ModelConfig::default()
        };
        let params = ModelParams::init(&cfg, &mut rng);
        let t = rng.random_range(1..=12);
        let input = random_input(&cfg, t, &mut rng);
        let mut perm: Vec<usize> = (0..t).collect();
        perm.shuffle(&mut rng);
        let permuted = TableInput {
            x: input.x.select(ndarray::Axis(0), &perm),
            columns: perm.iter().map(|&i| input.columns[i].clone()).collect(),
        };
        let a = predict_log(&params, &cfg, &input).unwrap();
        let b = predict_log(&params, &cfg, &permuted).unwrap();
        for (j, &i) in perm.iter().enumerate() {
            if a[i].to_bits() != b[j].to_bits() {
                return Err(format!("table {case}: column {i} gives {} vs {}", a[i], b[j]));
            }
        }
    }
    Ok("100 tables bit-identical under column permutation".into())
}

pub struct SemanticsRun {
    pub p90: Vec<(Ablation, f64)>,
    pub columns: usize,
    pub seconds: f64,
}

fn eval_tables<'a>(tables: &[&'a SyntheticTable]) -> Vec<EvalTable<'a>> {
    tables
        .iter()
        .map(|t| EvalTable {
            table: &t.table,
            truths: &t.truths,
        })
        .collect()
}

pub fn semantics_run(columns: usize, max_epochs: usize, seed: u64) -> SemanticsRun {
    let started = Instant::now();
    let corpus = semantic_corpus(&SyntheticSpec {
        columns,
        seed,
        ..SyntheticSpec::default()
    });
    let ids: Vec<&str> = corpus.iter().map(|t| t.table.table_id()).collect();
    let manifest = split_dataset(&ids, seed, SplitRatios::new(0.7, 0.15, 0.15)).unwrap();
    let pick = |ids: &[String]| -> Vec<&SyntheticTable> {
        corpus
            .iter()
            .filter(|t| ids.iter().any(|i| i == t.table.table_id()))
            .collect()
    };
    let (train_set, val_set, test_set) = (
        pick(&manifest.splits.train),
        pick(&manifest.splits.validation),
        pick(&manifest.splits.test),
    );
    let embedder = TestEmbedder::new(64);
    let access = ProfileAccess {
        mode: AccessMode::Sequential,
        size: SampleSize::Rows(100),
        seed,
        empty: EmptyCells::Keep,
    };
    let tc = TrainConfig {
        max_epochs,
        ..TrainConfig::default()
    };
    let prepare = |set: &[&SyntheticTable], cfg: &ModelConfig| -> Vec<PreparedTable> {
        let pairs: Vec<_> = set.iter().map(|t| (&t.table, Some(t.truths.as_slice()))).collect();
        prepare_tables(&pairs, &embedder, cfg, &access, seed).unwrap()
    };
    let mut learned = Vec::new();
    for ablation in [Ablation::Full, Ablation::WoTabAndCol, Ablation::PermuteCol] {
        let cfg = ModelConfig {
            l: 64,
            heads: 8,
            ablation,
            ..ModelConfig::default()
        };
        let out = train(&prepare(&train_set, &cfg), &prepare(&val_set, &cfg), &cfg, &tc, seed).unwrap();
        learned.push(LearnedModel {
            name: ablation.name().into(),
            checkpoint: out.checkpoint,
        });
    }
    let spec = BenchmarkSpec {
        methods: learned.iter().map(|m| MethodId::Learned(m.name.clone())).collect(),
        mode: AccessMode::Sequential,
        n: SampleSize::Rows(100),
        seed,
        clamp: false,
        empty: EmptyCells::Keep,
    };
    let ctx = BenchmarkContext {
        learned: &learned,
        provider: Some(&embedder),
        ..BenchmarkContext::default()
    };
    let report = run_benchmark(&eval_tables(&test_set), &spec, &ctx).unwrap();
    let p90 = [Ablation::Full, Ablation::WoTabAndCol, Ablation::PermuteCol]
        .into_iter()
        .map(|a| {
            (
                a,
                percentile(&report.q_errors(&MethodId::Learned(a.name().into())), 90.0).unwrap(),
            )
        })
        .collect();
    SemanticsRun {
        p90,
        columns: corpus.iter().map(|t| t.truths.len()).sum(),
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn semantics_benefit() -> Check {
    let run = semantics_run(2000, 40, 1);
    let get = |a: Ablation| run.p90.iter().find(|(b, _)| *b == a).unwrap().1;
    let (full, stats, permuted) = (
        get(Ablation::Full),
        get(Ablation::WoTabAndCol),
        get(Ablation::PermuteCol),
    );
    let summary = format!(
        "{} columns, p90 q-error full {full:.3}, wo_tab_and_col {stats:.3}, permute_col {permuted:.3}, {:.0}s",
        run.columns, run.seconds
    );
    if run.columns >= 2000 && full <= 0.7 * stats && permuted > full && run.seconds < 600.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

/// Trains a statistics-free model and checks that estimating the test
/// tables never touches a cell value.
pub fn no_data_mode() -> Check {
    let seed = 5;
    let corpus = semantic_corpus(&SyntheticSpec {
        columns: 300,
        seed,
        ..SyntheticSpec::default()
    });
    let (train_set, test_set) = corpus.split_at(corpus.len() * 3 / 4);
    let embedder = TestEmbedder::new(32);
    let cfg = ModelConfig {
        l: 32,
        heads: 4,
        use_stats: false,
        hidden: vec![64, 32],
        ..ModelConfig::default()
    };
    let access = ProfileAccess::default();
    let pairs: Vec<_> = train_set
        .iter()
        .map(|t| (&t.table, Some(t.truths.as_slice())))
        .collect();
    let prepared = prepare_tables(&pairs, &embedder, &cfg, &access, seed).unwrap();
    let tc = TrainConfig {
        max_epochs: 5,
        ..TrainConfig::default()
    };
    let model = LearnedModel {
        name: "nodata".into(),
        checkpoint: train(&prepared, &[], &cfg, &tc, seed).unwrap().checkpoint,
    };
    let mut spec = BenchmarkSpec::classical(AccessMode::Sequential, SampleSize::Rows(0), seed);
    spec.methods.push(MethodId::Learned("nodata".into()));
    let tables: Vec<&SyntheticTable> = test_set.iter().collect();
    test_set.iter().for_each(|t| t.table.reset_read_counts());
    let ctx = BenchmarkContext {
        learned: std::slice::from_ref(&model),
        provider: Some(&embedder),
        ..BenchmarkContext::default()
    };
    let report = run_benchmark(&eval_tables(&tables), &spec, &ctx).unwrap();
    let reads: u64 = test_set.iter().map(|t| t.table.read_count()).sum();
    let learned: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.method == MethodId::Learned("nodata".into()))
        .collect();
    let positive = learned
        .iter()
        .all(|r| r.d_hat.is_some_and(|v| v.is_finite() && v > 0.0));
    let classical_na = report
        .records
        .iter()
        .filter(|r| matches!(r.method, MethodId::Classical(_)))
        .all(|r| r.not_applicable.is_some());
    let summary = format!(
        "{} test columns, {reads} cell reads, learned estimates finite and positive: {positive}, classical all N/A: {classical_na}",
        learned.len()
    );
    if reads == 0 && positive && classical_na && !learned.is_empty() {
        Ok(summary)
    } else {
        Err(summary)
    }
}
