use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::checkpoint::Checkpoint;
use super::network::{loss_and_gradients, predict_log, TableInput};
use super::pipeline::PreparedTable;
use super::{ModelConfig, ModelError, ModelParams, Result};
use crate::eval::{percentile, q_error};
use crate::ext_real;

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;
const DROPOUT_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    /// Columns per gradient step; tables are never split.
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best validation score.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: 256,
            max_epochs: 200,
            patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(ModelError::Config("batch_size must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(ModelError::Config("max_epochs must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    #[serde(with = "ext_real")]
    pub train_loss: f64,
    #[serde(with = "ext_real")]
    pub validation_p90: f64,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the epoch with the lowest validation 90th-percentile q-error.
    pub checkpoint: Checkpoint,
    pub final_params: ModelParams,
    pub final_validation_p90: f64,
    pub log: Vec<EpochLog>,
}

/// Writes the log as JSON lines.
pub fn write_log<W: Write>(log: &[EpochLog], mut out: W) -> std::io::Result<()> {
    for entry in log {
        serde_json::to_writer(&mut out, entry)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn labelled(tables: &[PreparedTable]) -> Result<Vec<(&TableInput, &[f64])>> {
    tables
        .iter()
        .filter(|t| t.input.t() > 0)
        .map(|t| {
            t.truths
                .as_deref()
                .map(|d| (&t.input, d))
                .ok_or_else(|| ModelError::Truth(format!("no ground truth for {}", t.table_id)))
        })
        .collect()
}

/// Greedy packing of whole tables, in the given order, into batches of at
/// most `limit` columns. A table wider than `limit` forms its own batch.
fn pack(widths: &[usize], order: &[usize], limit: usize) -> Vec<Vec<usize>> {
    let mut batches = Vec::new();
    let mut current = Vec::new();
    let mut size = 0;
    for &i in order {
        if !current.is_empty() && size + widths[i] > limit {
            batches.push(std::mem::take(&mut current));
            size = 0;
        }
        current.push(i);
        size += widths[i];
    }
    if !current.is_empty() {
        batches.push(current);
    }
    batches
}

fn mean_loss(params: &ModelParams, config: &ModelConfig, data: &[(&TableInput, &[f64])]) -> Result<f64> {
    let mut total = 0.0;
    let mut m = 0usize;
    for (input, truth) in data {
        for (pred, d) in predict_log(params, config, input)?.into_iter().zip(truth.iter()) {
            total += (pred - d.ln()).powi(2);
            m += 1;
        }
    }
    Ok(total / m.max(1) as f64)
}

fn p90(params: &ModelParams, config: &ModelConfig, data: &[(&TableInput, &[f64])]) -> Result<f64> {
    let mut q = Vec::new();
    for (input, truth) in data {
        for (pred, &d) in predict_log(params, config, input)?.into_iter().zip(truth.iter()) {
            q.push(q_error(pred.exp(), d).map_err(|e| ModelError::Truth(e.to_string()))?);
        }
    }
    percentile(&q, 90.0).map_err(|e| ModelError::Truth(e.to_string()))
}

/// Trains from scratch. When `validation` is empty the checkpoint is
/// selected on the training tables.
pub fn train(
    training: &[PreparedTable],
    validation: &[PreparedTable],
    config: &ModelConfig,
    train_config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    train_config.validate()?;
    let data = labelled(training)?;
    if data.is_empty() {
        return Err(ModelError::Truth("no training columns".into()));
    }
    let held_out = labelled(validation)?;
    let selection = if held_out.is_empty() { &data } else { &held_out };

    let mut params = ModelParams::init(config, &mut rng(seed, INIT_STREAM));
    let mut shuffle = rng(seed, SHUFFLE_STREAM);
    let mut dropout = (config.attention_dropout > 0.0).then(|| rng(seed, DROPOUT_STREAM));
    let mut adam = Adam::new(&params, train_config.adam)?;

    let widths: Vec<usize> = data.iter().map(|(x, _)| x.t()).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut log = Vec::with_capacity(train_config.max_epochs);
    let mut last = f64::INFINITY;

    for epoch in 1..=train_config.max_epochs {
        order.shuffle(&mut shuffle);
        for batch in pack(&widths, &order, train_config.batch_size) {
            let tables: Vec<&TableInput> = batch.iter().map(|&i| data[i].0).collect();
            let truths: Vec<&[f64]> = batch.iter().map(|&i| data[i].1).collect();
            let (_, grads) = loss_and_gradients(&params, config, &tables, &truths, dropout.as_mut())?;
            adam.step(&mut params, &grads)?;
        }
        let train_loss = mean_loss(&params, config, &data)?;
        last = p90(&params, config, selection)?;
        let selected = best.as_ref().is_none_or(|b| last < b.0);
        if selected {
            best = Some((last, epoch, params.clone()));
        }
        log.push(EpochLog {
            epoch,
            train_loss,
            validation_p90: last,
            selected,
        });
        if let Some(patience) = train_config.patience {
            if best.as_ref().is_some_and(|b| epoch - b.1 >= patience) {
                break;
            }
        }
    }

    let (validation_p90, epoch, best_params) = best.expect("at least one epoch runs");
    Ok(TrainOutcome {
        checkpoint: Checkpoint {
            config: config.clone(),
            train: train_config.clone(),
            seed,
            epoch,
            validation_p90,
            params: best_params,
        },
        final_params: params,
        final_validation_p90: last,
        log,
    })
}
