use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::Deserialize;

use super::{types, ColumnData, ColumnSchema, CorpusError, Result, TableRecord};

static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?\d+$").unwrap());
static DECIMAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$").unwrap());
static BOOLEAN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?i:true|false)$").unwrap());
pub(super) static ISO_TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$").unwrap()
});

/// One entry of a sidecar schema file (`<table>.schema.json`).
#[derive(Debug, Clone, Deserialize)]
pub struct SidecarColumn {
    pub name: String,
    #[serde(rename = "type")]
    pub declared_type: Option<String>,
    pub constraints: Option<String>,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Explicit sidecar path. When unset, `<csv path>.schema.json` is used if it exists.
    pub sidecar: Option<PathBuf>,
    /// Overrides the table id (defaults to the file stem).
    pub table_id: Option<String>,
}

/// Infers a declared type by scanning every non-empty value.
///
/// Candidates are tried in the order big int, double, bool, timestamp; the
/// first one every value satisfies wins, otherwise the column is a string.
pub fn infer_type<S: AsRef<str>>(values: &[S]) -> &'static str {
    let mut present = values.iter().map(AsRef::as_ref).filter(|v| !v.is_empty()).peekable();
    if present.peek().is_none() {
        return types::STRING;
    }
    let present: Vec<&str> = present.collect();
    let all = |pred: &dyn Fn(&str) -> bool| present.iter().all(|v| pred(v));
    if all(&|v| INTEGER.is_match(v) && v.parse::<i64>().is_ok()) {
        types::BIG_INT
    } else if all(&|v| DECIMAL.is_match(v)) {
        types::DOUBLE
    } else if all(&|v| BOOLEAN.is_match(v)) {
        types::BOOL
    } else if all(&|v| ISO_TIMESTAMP.is_match(v)) {
        types::TIMESTAMP
    } else {
        types::STRING
    }
}

/// Loads a CSV file with a header row into a [`TableRecord`].
pub fn load_table(path: &Path, options: &LoadOptions) -> Result<TableRecord> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: display.clone(),
        source,
    })?;
    let table_id = options.table_id.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| display.clone())
    });
    let sidecar_path = match &options.sidecar {
        Some(p) => Some(p.clone()),
        None => {
            let mut candidate = path.as_os_str().to_owned();
            candidate.push(".schema.json");
            let candidate = PathBuf::from(candidate);
            candidate.exists().then_some(candidate)
        }
    };
    let sidecar = sidecar_path.map(|p| read_sidecar(&p)).transpose()?;
    read_table(&display, table_id, file, sidecar.as_deref())
}

fn read_sidecar(path: &Path) -> Result<Vec<SidecarColumn>> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: display.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Sidecar {
        path: display,
        message: e.to_string(),
    })
}

/// Parses CSV from any reader. `source` names the input in error messages.
pub fn read_table<R: Read>(
    source: &str,
    table_id: String,
    input: R,
    sidecar: Option<&[SidecarColumn]>,
) -> Result<TableRecord> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| csv_error(source, e))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CorpusError::EmptyFile {
            path: source.to_string(),
        });
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(source, e))?;
        for (column, value) in cells.iter_mut().zip(record.iter()) {
            column.push(value.to_string());
        }
    }

    let by_name: HashMap<&str, &SidecarColumn> = sidecar
        .unwrap_or_default()
        .iter()
        .map(|c| (c.name.as_str(), c))
        .collect();
    let schemas = headers
        .iter()
        .zip(&cells)
        .map(|(name, values)| {
            let extra = by_name.get(name.as_str());
            ColumnSchema {
                name: name.clone(),
                declared_type: extra
                    .and_then(|c| c.declared_type.clone())
                    .unwrap_or_else(|| infer_type(values).to_string()),
                constraints: extra.and_then(|c| c.constraints.clone()),
                comment: extra.and_then(|c| c.comment.clone()),
            }
        })
        .collect();
    let columns = cells.into_iter().map(ColumnData::new).collect();
    TableRecord::new(table_id, schemas, columns)
}

fn csv_error(source: &str, err: csv::Error) -> CorpusError {
    let row = err.position().map(|p| p.record()).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => CorpusError::RaggedRow {
            path: source.to_string(),
            row,
            expected: *expected_len,
            found: *len,
        },
        _ => CorpusError::Malformed {
            path: source.to_string(),
            row,
            message: err.to_string(),
        },
    }
}

/// Writes a table back out as CSV with a header row.
pub fn write_table_csv<W: Write>(table: &TableRecord, out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(table.schemas().iter().map(|s| s.name.as_str()))?;
    let columns: Vec<&[String]> = table.columns().iter().map(ColumnData::values).collect();
    for row in 0..table.row_count() {
        writer.write_record(columns.iter().map(|c| c[row].as_str()))?;
    }
    writer.flush()?;
    Ok(())
}
