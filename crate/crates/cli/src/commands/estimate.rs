use std::collections::BTreeSet;
use std::path::Path;

use ndv_core::eval::{
    run_benchmark, write_report, BenchmarkContext, BenchmarkReport, BenchmarkSpec, EvalTable, LearnedModel, MethodId,
};
use ndv_core::model::{model_texts, Ablation, Checkpoint, ModelError};
use ndv_core::profiles::AccessMode;
use ndv_core::semantics::EmbeddingStore;
use ndv_core::{SolverConfig, TableRecord};

use crate::cli::{EstimateArgs, REPORT_FORMATS};
use crate::dataset::{self, create_dir, ground_truth_path, Manifest, Truths};
use crate::error::{CliError, Result};

pub fn run(args: &EstimateArgs) -> Result<()> {
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let learned = load_checkpoints(&args.checkpoints)?;
    let methods = resolve_methods(&args.methods, &learned)?;
    let uses_learned = methods.iter().any(|m| matches!(m, MethodId::Learned(_)));
    let provider = if uses_learned {
        Some(dataset::require_provider(&args.provider, "a learned method")?)
    } else {
        dataset::provider(&args.provider)?
    };

    let manifest = Manifest::load(&args.manifest)?;
    let truths = Truths::load(&ground_truth_path(&args.manifest, args.ground_truth.as_ref()))?;
    let ids = manifest.dataset.splits.get(args.split.into());
    let tables = dataset::load_tables(&manifest, ids.iter().map(String::as_str))?;
    let table_truths = tables.iter().map(|t| truths.for_table(t)).collect::<Result<Vec<_>>>()?;

    if let Some(store) = provider.as_ref().and_then(|p| p.store()) {
        let used: Vec<&LearnedModel> = learned
            .iter()
            .filter(|m| methods.contains(&MethodId::Learned(m.name.clone())))
            .collect();
        check_coverage(store, &used, &tables)?;
    }

    let spec = BenchmarkSpec {
        methods,
        mode: args.mode.into(),
        n: args.n,
        seed: args.seed,
        clamp: args.clamp,
        empty: manifest.empty_cells,
    };
    let ctx = BenchmarkContext {
        learned: &learned,
        provider: provider.as_ref().map(|p| p.get()),
        solver: SolverConfig::default(),
        jobs: args.jobs,
    };
    let eval: Vec<EvalTable<'_>> = tables
        .iter()
        .zip(&table_truths)
        .map(|(table, truths)| EvalTable { table, truths })
        .collect();
    let report = run_benchmark(&eval, &spec, &ctx)?;

    create_dir(&args.out)?;
    for (format, ext) in REPORT_FORMATS {
        write_report(&report, &args.out.join(format!("report.{ext}")), format)?;
    }
    print_summary(&report, tables.len());
    Ok(())
}

fn load_checkpoints(specs: &[String]) -> Result<Vec<LearnedModel>> {
    let mut models: Vec<LearnedModel> = Vec::new();
    for spec in specs {
        let (name, path) = spec
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| CliError::Usage(format!("--checkpoint expects NAME=PATH, got {spec:?}")))?;
        if models.iter().any(|m| m.name == name) {
            return Err(CliError::Usage(format!("checkpoint name {name:?} given twice")));
        }
        let path = Path::new(path);
        let checkpoint = Checkpoint::load(path).map_err(|e| match e {
            ModelError::Io(io) => CliError::Missing(format!("checkpoint {}: {io}", path.display())),
            other => CliError::Data(format!("checkpoint {}: {other}", path.display())),
        })?;
        models.push(LearnedModel {
            name: name.to_string(),
            checkpoint,
        });
    }
    Ok(models)
}

/// Expands method sets and checks learned names against the loaded checkpoints.
pub fn resolve_methods(names: &[String], learned: &[LearnedModel]) -> Result<Vec<MethodId>> {
    let learned_ids = |pred: &dyn Fn(&LearnedModel) -> bool| -> Vec<MethodId> {
        learned
            .iter()
            .filter(|m| pred(m))
            .map(|m| MethodId::Learned(m.name.clone()))
            .collect()
    };
    let mut out: Vec<MethodId> = Vec::new();
    for name in names.iter().map(|n| n.trim()).filter(|n| !n.is_empty()) {
        let ids = match name {
            "all-classical" => MethodId::all_classical(),
            "all" => {
                let mut all = MethodId::all_classical();
                all.extend(learned_ids(&|_| true));
                all
            }
            "learned" => {
                let ids = learned_ids(&|_| true);
                if ids.is_empty() {
                    return Err(CliError::Usage("`learned` needs at least one --checkpoint".into()));
                }
                ids
            }
            "learned-nodata" => {
                let ids = learned_ids(&|m| !m.checkpoint.config.use_stats);
                if ids.is_empty() {
                    return Err(CliError::Usage(
                        "`learned-nodata` needs a --checkpoint trained with --use-stats false".into(),
                    ));
                }
                ids
            }
            other => {
                let id: MethodId = other.parse().map_err(CliError::Usage)?;
                if let MethodId::Learned(n) = &id {
                    if !learned.iter().any(|m| &m.name == n) {
                        return Err(CliError::Usage(format!("no --checkpoint named {n:?}")));
                    }
                }
                vec![id]
            }
        };
        for id in ids {
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no methods selected".into()));
    }
    Ok(out)
}

/// Fails with every column text the store lacks, before any estimation.
fn check_coverage(store: &EmbeddingStore, models: &[&LearnedModel], tables: &[TableRecord]) -> Result<()> {
    let mut missing = BTreeSet::new();
    for model in models {
        let config = &model.checkpoint.config;
        if store.header().dim != config.l {
            return Err(CliError::Data(format!(
                "checkpoint {:?} expects {}-dimensional embeddings, the store has {}",
                model.name,
                config.l,
                store.header().dim
            )));
        }
        if config.ablation == Ablation::WoTabAndCol {
            continue;
        }
        for table in tables {
            for text in model_texts(table, config, model.checkpoint.seed)? {
                if !store.contains(&text) {
                    missing.insert(text);
                }
            }
        }
    }
    if missing.is_empty() {
        return Ok(());
    }
    Err(ModelError::MissingEmbeddings(missing.into_iter().collect()).into())
}

fn print_summary(report: &BenchmarkReport, tables: usize) {
    println!(
        "{} tables, {} columns, {} access, n = {}",
        tables,
        report.records.len() / report.spec.methods.len().max(1),
        match report.spec.mode {
            AccessMode::Sequential => "sequential",
            AccessMode::Random => "random",
        },
        report.spec.n
    );
    println!(
        "{:<24} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>5}",
        "method", "mean", "50%", "75%", "90%", "95%", "99%", "n/a"
    );
    let cell = |v: f64| {
        if !v.is_finite() {
            format!("{:>10}", "inf")
        } else if v >= 1e6 {
            format!("{v:>10.3e}")
        } else {
            format!("{v:>10.2}")
        }
    };
    for method in &report.spec.methods {
        let Some(summary) = report.summary(method) else {
            continue;
        };
        match &summary.aggregate {
            Some(a) => println!(
                "{:<24} {} {} {} {} {} {} {:>5}",
                method.to_string(),
                cell(a.mean),
                cell(a.p50),
                cell(a.p75),
                cell(a.p90),
                cell(a.p95),
                cell(a.p99),
                summary.not_applicable
            ),
            None => println!(
                "{:<24} {:>65} {:>5}",
                method.to_string(),
                "not applicable",
                summary.not_applicable
            ),
        }
    }
}
