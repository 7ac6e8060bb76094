use std::collections::BTreeSet;

use ndarray::Array2;

use super::ablation::{permute_table_texts, permute_text};
use super::checkpoint::Checkpoint;
use super::network::{predict_log, ColumnFeatures, TableInput};
use super::{Ablation, ModelConfig, ModelError, Result};
use crate::corpus::{EmptyCells, TableRecord};
use crate::profiles::{column_seed, draw_sample, frequency_profile_with, profile_cutoff, AccessMode, SampleSize};
use crate::semantics::{self, EmbeddingProvider, SemanticsError};

/// How the profile of each column is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileAccess {
    pub mode: AccessMode,
    pub size: SampleSize,
    pub seed: u64,
    pub empty: EmptyCells,
}

impl Default for ProfileAccess {
    fn default() -> Self {
        Self {
            mode: AccessMode::Sequential,
            size: SampleSize::Rows(crate::profiles::DEFAULT_CUTOFF),
            seed: 0,
            empty: EmptyCells::Keep,
        }
    }
}

/// A table turned into network inputs, with the texts that were embedded.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTable {
    pub table_id: String,
    pub texts: Vec<String>,
    pub input: TableInput,
    /// True NDV per column, when known.
    pub truths: Option<Vec<f64>>,
}

/// Serialized column texts after the ablation's text transform.
pub fn model_texts(table: &TableRecord, config: &ModelConfig, seed: u64) -> Result<Vec<String>> {
    let texts: Vec<String> = semantics::table_texts(table)?.into_iter().map(|t| t.text).collect();
    Ok(match config.ablation {
        Ablation::PermuteCol => texts.iter().map(|t| permute_text(t, seed)).collect(),
        Ablation::PermuteTab => permute_table_texts(&texts, seed, table.table_id()),
        _ => texts,
    })
}

fn column_features(table: &TableRecord, config: &ModelConfig, access: &ProfileAccess) -> Result<Vec<ColumnFeatures>> {
    let population = table.row_count() as u64;
    table
        .columns()
        .iter()
        .enumerate()
        .map(|(i, column)| {
            let profile = if config.use_stats {
                let seed = column_seed(access.seed, table.table_id(), i);
                let sample = draw_sample(column, access.mode, access.size, seed)?;
                profile_cutoff(&frequency_profile_with(&sample, access.empty), config.k)
            } else {
                Vec::new()
            };
            Ok(ColumnFeatures { population, profile })
        })
        .collect()
}

/// Builds the network input of one table. In no-data mode no cell value is read.
pub fn prepare_table(
    table: &TableRecord,
    provider: &dyn EmbeddingProvider,
    config: &ModelConfig,
    access: &ProfileAccess,
    text_seed: u64,
    truths: Option<&[u64]>,
) -> Result<PreparedTable> {
    if provider.dim() != config.l {
        return Err(ModelError::Shape(format!(
            "provider dimension {}, model expects {}",
            provider.dim(),
            config.l
        )));
    }
    let texts = model_texts(table, config, text_seed)?;
    let x: Array2<f64> = semantics::embed_texts(&texts, provider)?;
    let columns = column_features(table, config, access)?;
    let truths = match truths {
        Some(d) if d.len() != columns.len() => {
            return Err(ModelError::Truth(format!(
                "{} truths for {} columns of {}",
                d.len(),
                columns.len(),
                table.table_id()
            )))
        }
        Some(d) if d.contains(&0) => return Err(ModelError::Truth(format!("zero NDV in {}", table.table_id()))),
        Some(d) => Some(d.iter().map(|&v| v as f64).collect()),
        None => None,
    };
    Ok(PreparedTable {
        table_id: table.table_id().to_owned(),
        texts,
        input: TableInput { x, columns },
        truths,
    })
}

/// Prepares many tables, first checking that every column text has an
/// embedding so a missing one is reported before any work starts.
pub fn prepare_tables(
    tables: &[(&TableRecord, Option<&[u64]>)],
    provider: &dyn EmbeddingProvider,
    config: &ModelConfig,
    access: &ProfileAccess,
    text_seed: u64,
) -> Result<Vec<PreparedTable>> {
    let mut unique = BTreeSet::new();
    for (table, _) in tables {
        unique.extend(model_texts(table, config, text_seed)?);
    }
    let mut missing = Vec::new();
    for text in &unique {
        match provider.embed(text) {
            Ok(_) => {}
            Err(SemanticsError::Lookup(key)) => missing.push(key),
            Err(e) => return Err(e.into()),
        }
    }
    if !missing.is_empty() {
        return Err(ModelError::MissingEmbeddings(missing));
    }
    tables
        .iter()
        .map(|(table, truths)| prepare_table(table, provider, config, access, text_seed, *truths))
        .collect()
}

/// `D` estimates for every column of `table`, in column order.
pub fn predict(
    table: &TableRecord,
    provider: &dyn EmbeddingProvider,
    checkpoint: &Checkpoint,
    access: &ProfileAccess,
) -> Result<Vec<f64>> {
    let prepared = prepare_table(table, provider, &checkpoint.config, access, checkpoint.seed, None)?;
    let logs = predict_log(&checkpoint.params, &checkpoint.config, &prepared.input)?;
    Ok(logs.into_iter().map(f64::exp).collect())
}
