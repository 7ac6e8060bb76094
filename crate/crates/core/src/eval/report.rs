use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::benchmark::BenchmarkReport;
use super::layout::LayoutSeries;
use super::{EvalError, Result};
use crate::ext_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(ext_real::render).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> EvalError {
    EvalError::Io(std::io::Error::other(e))
}

pub fn write_report_to<W: Write>(report: &BenchmarkReport, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Json => serde_json::to_writer_pretty(out, report).map_err(|e| EvalError::Io(e.into())),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["table_id", "column", "method", "D", "D_hat", "q", "not_applicable"])
                .map_err(csv_error)?;
            for r in &report.records {
                w.write_record([
                    r.table_id.clone(),
                    r.column.clone(),
                    r.method.to_string(),
                    r.d.to_string(),
                    cell(r.d_hat),
                    cell(r.q),
                    r.not_applicable.clone().unwrap_or_default(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// Writes through a temporary file so a failed write leaves no partial report.
fn atomically(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    let mut out = BufWriter::new(File::create(&tmp)?);
    write(&mut out)?;
    out.flush()?;
    drop(out);
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_report(report: &BenchmarkReport, path: &Path, format: ReportFormat) -> Result<()> {
    atomically(path, |out| write_report_to(report, format, out))
}

pub fn read_report<R: Read>(input: R) -> Result<BenchmarkReport> {
    serde_json::from_reader(input).map_err(|e| EvalError::Io(e.into()))
}

pub fn write_layout_to<W: Write>(series: &LayoutSeries, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Json => serde_json::to_writer_pretty(out, series).map_err(|e| EvalError::Io(e.into())),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["k", "method", "D", "D_hat", "q"]).map_err(csv_error)?;
            for p in &series.points {
                for e in &p.entries {
                    w.write_record([
                        p.k.to_string(),
                        e.method.name().to_string(),
                        p.d.to_string(),
                        cell(e.estimate),
                        cell(e.q),
                    ])
                    .map_err(csv_error)?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub fn write_layout(series: &LayoutSeries, path: &Path, format: ReportFormat) -> Result<()> {
    atomically(path, |out| write_layout_to(series, format, out))
}
