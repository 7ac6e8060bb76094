//! Evaluation: q-error, percentile reports, benchmark runs over the access
//! regimes and the synthetic data-layout experiment.

mod benchmark;
mod layout;
mod metrics;
mod report;
pub mod synthetic;

use thiserror::Error;

pub use benchmark::{
    run_benchmark, BenchmarkContext, BenchmarkReport, BenchmarkSpec, ColumnRecord, EvalTable, LearnedModel, MethodId,
    MethodSummary,
};
pub use layout::{layout_column, layout_experiment, LayoutEntry, LayoutPoint, LayoutSeries};
pub use metrics::{percentile, q_error, Aggregate};
pub use report::{read_report, write_layout, write_layout_to, write_report, write_report_to, ReportFormat};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth must be a finite value of at least 1, got {0}")]
    Truth(f64),
    #[error("no values to aggregate")]
    Empty,
    #[error("percentile must lie in (0, 100], got {0}")]
    Percentile(f64),
    #[error("cannot rank value {0}")]
    Value(f64),
    #[error("{0}")]
    Data(String),
    #[error("learned estimator: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;
