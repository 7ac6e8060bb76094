//! Tabular corpus ingestion: column schemas, column data, filtering, dataset
//! splits and exact distinct counts used as ground truth.

mod filter;
mod ingest;
mod split;

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{filter_columns, is_semantic_free_name, Exclusion, ExclusionReason, FilterOutcome};
pub use ingest::{infer_type, load_table, read_table, write_table_csv, LoadOptions, SidecarColumn};
pub use split::{split_dataset, DatasetManifest, Split, SplitRatios, Splits};

/// Declared types produced by CSV type inference.
pub mod types {
    pub const BIG_INT: &str = "big int";
    pub const DOUBLE: &str = "double";
    pub const STRING: &str = "string";
    pub const BOOL: &str = "bool";
    pub const TIMESTAMP: &str = "timestamp";
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file is empty")]
    EmptyFile { path: String },
    #[error("{path}: row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: String,
        row: u64,
        expected: u64,
        found: u64,
    },
    #[error("{path}: row {row}: {message}")]
    Malformed { path: String, row: u64, message: String },
    #[error("{path}: invalid schema sidecar: {message}")]
    Sidecar { path: String, message: String },
    #[error("invalid table {table_id}: {message}")]
    InvalidTable { table_id: String, message: String },
    #[error("cannot compute the distinct count of an empty column")]
    EmptyColumn,
    #[error("invalid split: {0}")]
    Split(String),
    #[error("ground truth: {0}")]
    GroundTruth(String),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// Schema-level description of one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(rename = "type")]
    pub declared_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, declared_type: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            declared_type: declared_type.into(),
            constraints: None,
            comment: None,
        }
    }

    pub fn with_constraints(mut self, constraints: impl Into<String>) -> Self {
        self.constraints = Some(constraints.into());
        self
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comment = Some(comment.into());
        self
    }
}

/// The cell values of one column, in physical row order.
///
/// Every accessor that hands out cell values bumps an internal read counter
/// by the number of cells exposed; [`ColumnData::row_count`] does not. This
/// lets callers verify that an estimation path never touched the data.
#[derive(Debug)]
pub struct ColumnData {
    values: Vec<String>,
    reads: AtomicU64,
}

impl ColumnData {
    pub fn new(values: Vec<String>) -> Self {
        Self {
            values,
            reads: AtomicU64::new(0),
        }
    }

    /// Number of rows. Known from ingestion metadata, not a data read.
    pub fn row_count(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All values. Counts as reading every row.
    pub fn values(&self) -> &[String] {
        self.record_reads(self.values.len());
        &self.values
    }

    /// The first `n` values (clamped to the row count).
    pub fn prefix(&self, n: usize) -> &[String] {
        let n = n.min(self.values.len());
        self.record_reads(n);
        &self.values[..n]
    }

    pub fn get(&self, row: usize) -> Option<&str> {
        let value = self.values.get(row)?;
        self.record_reads(1);
        Some(value.as_str())
    }

    /// Total cells handed out since construction or the last reset.
    pub fn read_count(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn reset_read_count(&self) {
        self.reads.store(0, Ordering::Relaxed);
    }

    pub fn into_values(self) -> Vec<String> {
        self.values
    }

    fn record_reads(&self, cells: usize) {
        self.reads.fetch_add(cells as u64, Ordering::Relaxed);
    }
}

impl Clone for ColumnData {
    fn clone(&self) -> Self {
        Self::new(self.values.clone())
    }
}

impl PartialEq for ColumnData {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl<S: Into<String>> FromIterator<S> for ColumnData {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(Into::into).collect())
    }
}

/// One table: parallel lists of column schemas and column data of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRecord {
    table_id: String,
    schemas: Vec<ColumnSchema>,
    columns: Vec<ColumnData>,
}

impl TableRecord {
    pub fn new(table_id: impl Into<String>, schemas: Vec<ColumnSchema>, columns: Vec<ColumnData>) -> Result<Self> {
        let table_id = table_id.into();
        let invalid = |message: String| CorpusError::InvalidTable {
            table_id: table_id.clone(),
            message,
        };
        if schemas.is_empty() {
            return Err(invalid("a table needs at least one column".into()));
        }
        if schemas.len() != columns.len() {
            return Err(invalid(format!(
                "{} schemas but {} columns",
                schemas.len(),
                columns.len()
            )));
        }
        let rows = columns[0].row_count();
        if let Some(bad) = columns.iter().position(|c| c.row_count() != rows) {
            return Err(invalid(format!(
                "column {bad} has {} rows, expected {rows}",
                columns[bad].row_count()
            )));
        }
        Ok(Self {
            table_id,
            schemas,
            columns,
        })
    }

    pub fn table_id(&self) -> &str {
        &self.table_id
    }

    /// Number of columns.
    pub fn t(&self) -> usize {
        self.schemas.len()
    }

    /// Shared row count of every column.
    pub fn row_count(&self) -> usize {
        self.columns[0].row_count()
    }

    pub fn schemas(&self) -> &[ColumnSchema] {
        &self.schemas
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> (&ColumnSchema, &ColumnData) {
        (&self.schemas[index], &self.columns[index])
    }

    /// Sum of read counters over all columns.
    pub fn read_count(&self) -> u64 {
        self.columns.iter().map(ColumnData::read_count).sum()
    }

    pub fn reset_read_counts(&self) {
        self.columns.iter().for_each(ColumnData::reset_read_count);
    }

    pub fn into_parts(self) -> (String, Vec<ColumnSchema>, Vec<ColumnData>) {
        (self.table_id, self.schemas, self.columns)
    }
}

/// How empty cells participate in distinct counting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyCells {
    /// The empty string is an ordinary value.
    #[default]
    Keep,
    /// Empty cells are ignored.
    Drop,
}

impl EmptyCells {
    pub fn admits(self, value: &str) -> bool {
        match self {
            EmptyCells::Keep => true,
            EmptyCells::Drop => !value.is_empty(),
        }
    }
}

/// Exact distinct count of a column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub table_id: String,
    pub column_index: usize,
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "N")]
    pub n: u64,
}

/// Number of byte-exact distinct values in the column.
pub fn exact_ndv(column: &ColumnData) -> Result<u64> {
    exact_ndv_with(column, EmptyCells::Keep)
}

pub fn exact_ndv_with(column: &ColumnData, empty: EmptyCells) -> Result<u64> {
    if column.is_empty() {
        return Err(CorpusError::EmptyColumn);
    }
    let distinct: HashSet<&str> = column
        .values()
        .iter()
        .map(String::as_str)
        .filter(|v| empty.admits(v))
        .collect();
    if distinct.is_empty() {
        return Err(CorpusError::EmptyColumn);
    }
    Ok(distinct.len() as u64)
}

/// Ground truth for every column of a table.
pub fn table_ground_truth(table: &TableRecord, empty: EmptyCells) -> Result<Vec<GroundTruth>> {
    table
        .columns()
        .iter()
        .enumerate()
        .map(|(column_index, column)| {
            Ok(GroundTruth {
                table_id: table.table_id().to_string(),
                column_index,
                d: exact_ndv_with(column, empty)?,
                n: column.row_count() as u64,
            })
        })
        .collect()
}

pub fn write_ground_truth<W: Write>(mut out: W, truths: &[GroundTruth]) -> std::io::Result<()> {
    for truth in truths {
        serde_json::to_writer(&mut out, truth)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_ground_truth<R: BufRead>(input: R) -> Result<Vec<GroundTruth>> {
    let mut truths = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::GroundTruth(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let truth: GroundTruth =
            serde_json::from_str(&line).map_err(|e| CorpusError::GroundTruth(format!("line {}: {e}", lineno + 1)))?;
        if truth.d == 0 || truth.d > truth.n {
            return Err(CorpusError::GroundTruth(format!(
                "line {}: D={} outside [1, N={}]",
                lineno + 1,
                truth.d,
                truth.n
            )));
        }
        truths.push(truth);
    }
    Ok(truths)
}
