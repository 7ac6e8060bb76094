use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ingest::ISO_TIMESTAMP;
use super::TableRecord;

// Plain numbers: optional sign, at most one decimal point.
static PLAIN_NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?(\d+\.?\d*|\.\d+)$").unwrap());
static SCIENTIFIC: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?(\d+\.?\d*|\.\d+)[eE][+-]?\d+$").unwrap());
// Unix epoch in seconds or milliseconds.
static EPOCH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{10}|\d{13})$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NameTooShort,
    NumericName,
    ScientificNotationName,
    TimestampName,
    /// Every column of the table was excluded.
    NoColumnsLeft,
    /// The table has no data rows.
    EmptyTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub table_id: String,
    /// Column name, or `None` when the whole table is dropped.
    pub column: Option<String>,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// `None` when no column survived.
    pub table: Option<TableRecord>,
    pub exclusions: Vec<Exclusion>,
}

/// Why a column name carries no usable semantics, if it doesn't.
pub fn is_semantic_free_name(name: &str) -> Option<ExclusionReason> {
    let trimmed = name.trim();
    if trimmed.chars().count() <= 1 {
        Some(ExclusionReason::NameTooShort)
    } else if EPOCH.is_match(trimmed) || ISO_TIMESTAMP.is_match(trimmed) {
        Some(ExclusionReason::TimestampName)
    } else if PLAIN_NUMBER.is_match(trimmed) {
        Some(ExclusionReason::NumericName)
    } else if SCIENTIFIC.is_match(trimmed) {
        Some(ExclusionReason::ScientificNotationName)
    } else {
        None
    }
}

/// Drops columns whose names lack semantics, keeping the rest in order.
pub fn filter_columns(table: TableRecord) -> FilterOutcome {
    let (table_id, schemas, columns) = table.into_parts();
    let mut exclusions = Vec::new();
    let mut kept_schemas = Vec::new();
    let mut kept_columns = Vec::new();
    for (schema, column) in schemas.into_iter().zip(columns) {
        match is_semantic_free_name(&schema.name) {
            Some(reason) => exclusions.push(Exclusion {
                table_id: table_id.clone(),
                column: Some(schema.name),
                reason,
            }),
            None => {
                kept_schemas.push(schema);
                kept_columns.push(column);
            }
        }
    }
    if kept_schemas.is_empty() {
        exclusions.push(Exclusion {
            table_id,
            column: None,
            reason: ExclusionReason::NoColumnsLeft,
        });
        return FilterOutcome {
            table: None,
            exclusions,
        };
    }
    let table = TableRecord::new(table_id, kept_schemas, kept_columns)
        .expect("a subset of a valid table's columns is a valid table");
    FilterOutcome {
        table: Some(table),
        exclusions,
    }
}
