//! The on-disk dataset written by `ndv ingest` and read by the other subcommands.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use ndv_core::corpus::{
    filter_columns, load_table, read_ground_truth, DatasetManifest, EmptyCells, GroundTruth, LoadOptions, Split,
};
use ndv_core::semantics::{
    EmbeddingProvider, EmbeddingStore, RemoteConfig, RemoteProvider, SemanticsError, TestEmbedder,
};
use ndv_core::TableRecord;
use serde::{Deserialize, Serialize};

use crate::cli::ProviderArgs;
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub dataset: DatasetManifest,
    #[serde(default)]
    pub empty_cells: EmptyCells,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Data(format!("{}: invalid manifest: {e}", path.display())))
    }

    /// Every table id in split order: train, test, validation.
    pub fn all_ids(&self) -> Vec<&str> {
        [Split::Train, Split::Test, Split::Validation]
            .into_iter()
            .flat_map(|s| self.dataset.splits.get(s))
            .map(String::as_str)
            .collect()
    }
}

/// Loads one table from its recorded source and applies the column filter.
pub fn load_filtered(manifest: &Manifest, table_id: &str) -> Result<TableRecord> {
    let source = manifest
        .dataset
        .sources
        .get(table_id)
        .ok_or_else(|| CliError::Data(format!("manifest has no source for table {table_id:?}")))?;
    let options = LoadOptions {
        table_id: Some(table_id.to_string()),
        ..LoadOptions::default()
    };
    let table = load_table(Path::new(source), &options)?;
    filter_columns(table)
        .table
        .ok_or_else(|| CliError::Data(format!("table {table_id:?} has no columns left after filtering")))
}

pub fn load_tables<'a>(manifest: &Manifest, ids: impl IntoIterator<Item = &'a str>) -> Result<Vec<TableRecord>> {
    ids.into_iter().map(|id| load_filtered(manifest, id)).collect()
}

/// Exact NDVs per table, in column order.
pub struct Truths(HashMap<String, Vec<Option<GroundTruth>>>);

impl Truths {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| CliError::Missing(format!("ground truth {}: {e}; run `ndv ingest` first", path.display())))?;
        let mut map: HashMap<String, Vec<Option<GroundTruth>>> = HashMap::new();
        for truth in read_ground_truth(BufReader::new(file))? {
            let slots = map.entry(truth.table_id.clone()).or_default();
            if slots.len() <= truth.column_index {
                slots.resize(truth.column_index + 1, None);
            }
            let index = truth.column_index;
            if slots[index].is_some() {
                return Err(CliError::Data(format!(
                    "ground truth lists {:?} column {index} twice",
                    truth.table_id
                )));
            }
            slots[index] = Some(truth);
        }
        Ok(Self(map))
    }

    /// Truths for `table`, checked against its shape.
    pub fn for_table(&self, table: &TableRecord) -> Result<Vec<u64>> {
        let id = table.table_id();
        let missing = || CliError::Missing(format!("no ground truth for table {id:?}"));
        let slots = self.0.get(id).ok_or_else(missing)?;
        if slots.len() != table.t() {
            return Err(CliError::Data(format!(
                "ground truth for {id:?} covers {} columns, the table has {}",
                slots.len(),
                table.t()
            )));
        }
        slots
            .iter()
            .enumerate()
            .map(|(i, slot)| {
                let truth = slot
                    .as_ref()
                    .ok_or_else(|| CliError::Missing(format!("no ground truth for {id:?} column {i}")))?;
                if truth.n != table.row_count() as u64 {
                    return Err(CliError::Data(format!(
                        "ground truth for {id:?} column {i} has N={}, the table has {} rows",
                        truth.n,
                        table.row_count()
                    )));
                }
                Ok(truth.d)
            })
            .collect()
    }
}

pub fn ground_truth_path(manifest: &Path, explicit: Option<&PathBuf>) -> PathBuf {
    explicit.cloned().unwrap_or_else(|| {
        manifest
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(GROUND_TRUTH_FILE)
    })
}

/// An embedding provider chosen on the command line.
pub enum Provider {
    Store(EmbeddingStore),
    Dynamic(Box<dyn EmbeddingProvider>),
}

impl Provider {
    pub fn get(&self) -> &dyn EmbeddingProvider {
        match self {
            Provider::Store(s) => s,
            Provider::Dynamic(p) => p.as_ref(),
        }
    }

    pub fn store(&self) -> Option<&EmbeddingStore> {
        match self {
            Provider::Store(s) => Some(s),
            Provider::Dynamic(_) => None,
        }
    }
}

pub fn load_store(path: &Path) -> Result<EmbeddingStore> {
    EmbeddingStore::load(path).map_err(|e| match e {
        SemanticsError::Io(io) => CliError::Missing(format!("embeddings {}: {io}", path.display())),
        other => CliError::Data(other.to_string()),
    })
}

/// The embedding provider selected by the flags, or `None` if none was given.
pub fn provider(args: &ProviderArgs) -> Result<Option<Provider>> {
    if let Some(path) = &args.embeddings {
        return Ok(Some(Provider::Store(load_store(path)?)));
    }
    if let Some(url) = &args.embed_url {
        let dim = args
            .embed_dim
            .ok_or_else(|| CliError::Usage("--embed-url needs --embed-dim".into()))?;
        if dim == 0 {
            return Err(CliError::Usage("--embed-dim must be positive".into()));
        }
        let remote = RemoteProvider::new(RemoteConfig::new(url.clone(), dim));
        return Ok(Some(Provider::Dynamic(Box::new(remote))));
    }
    if let Some(dim) = args.test_embedder {
        if dim == 0 {
            return Err(CliError::Usage("--test-embedder dimension must be positive".into()));
        }
        return Ok(Some(Provider::Dynamic(Box::new(TestEmbedder::new(dim)))));
    }
    Ok(None)
}

/// Like [`provider`], but a provider is required.
pub fn require_provider(args: &ProviderArgs, why: &str) -> Result<Provider> {
    provider(args)?.ok_or_else(|| {
        CliError::Missing(format!(
            "{why} needs embeddings: pass --embeddings, --embed-url or --test-embedder"
        ))
    })
}

/// Writes `bytes` through a temporary sibling so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| CliError::Data(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}
