use std::io::BufWriter;

use ndv_core::corpus::Split;
use ndv_core::model::{prepare_tables, train, write_log, AdamConfig, ModelConfig, ProfileAccess, TrainConfig};

use crate::cli::TrainArgs;
use crate::dataset::{self, create_dir, ground_truth_path, Manifest, Truths};
use crate::error::{CliError, Result};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const LOG_FILE: &str = "train-log.jsonl";

pub fn run(args: &TrainArgs) -> Result<()> {
    let provider = dataset::require_provider(&args.provider, "training")?;
    let config = ModelConfig {
        l: provider.get().dim(),
        heads: args.heads,
        layers: args.layers,
        k: args.k,
        use_stats: args.use_stats,
        hidden: args.hidden.clone(),
        ablation: args.ablation.into(),
        profile_log1p: args.profile_log1p,
        layer_norm: args.layer_norm,
        attention_dropout: args.attention_dropout,
    };
    config.validate()?;
    let train_config = TrainConfig {
        adam: AdamConfig {
            learning_rate: args.lr,
            ..AdamConfig::default()
        },
        batch_size: args.batch_size,
        max_epochs: args.epochs,
        patience: args.patience,
    };
    train_config.validate()?;

    let manifest = Manifest::load(&args.manifest)?;
    let truths = Truths::load(&ground_truth_path(&args.manifest, args.ground_truth.as_ref()))?;
    let splits = &manifest.dataset.splits;
    let training_ids = splits.get(Split::Train);
    if training_ids.is_empty() {
        return Err(CliError::Data("the training split is empty".into()));
    }
    let ids = training_ids.iter().chain(splits.get(Split::Validation));
    let tables = dataset::load_tables(&manifest, ids.map(String::as_str))?;
    let table_truths = tables.iter().map(|t| truths.for_table(t)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<_> = tables
        .iter()
        .zip(&table_truths)
        .map(|(t, d)| (t, Some(d.as_slice())))
        .collect();
    let access = ProfileAccess {
        mode: args.mode.into(),
        size: args.n,
        seed: args.seed,
        empty: manifest.empty_cells,
    };
    // One pass over both splits so every missing embedding is listed before training.
    let mut prepared = prepare_tables(&pairs, provider.get(), &config, &access, args.seed)?;
    let validation = prepared.split_off(training_ids.len());

    let outcome = train(&prepared, &validation, &config, &train_config, args.seed)?;
    create_dir(&args.out)?;
    outcome.checkpoint.save(&args.out.join(CHECKPOINT_FILE))?;
    let log_path = args.out.join(LOG_FILE);
    let file = std::fs::File::create(&log_path).map_err(|e| CliError::Data(format!("{}: {e}", log_path.display())))?;
    write_log(&outcome.log, BufWriter::new(file))?;

    let ck = &outcome.checkpoint;
    println!(
        "trained {} epochs on {} tables ({} validation), ablation {}, use_stats {}",
        outcome.log.len(),
        prepared.len(),
        validation.len(),
        config.ablation,
        config.use_stats
    );
    println!(
        "selected epoch {} with validation 90% q-error {:.4}",
        ck.epoch, ck.validation_p90
    );
    Ok(())
}
