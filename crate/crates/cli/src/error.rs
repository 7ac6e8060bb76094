use std::process::ExitCode;

use ndv_core::corpus::CorpusError;
use ndv_core::eval::EvalError;
use ndv_core::model::ModelError;
use ndv_core::semantics::SemanticsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    /// A required input such as embeddings or ground truth is absent.
    #[error("{0}")]
    Missing(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Missing(_) => 3,
        })
    }

    pub fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SemanticsError> for CliError {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::Lookup(_) => CliError::Missing(e.to_string()),
            SemanticsError::Transport { .. } => CliError::Missing(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::MissingEmbeddings(_) => CliError::Missing(e.to_string()),
            ModelError::Config(m) => CliError::Usage(format!("invalid model config: {m}")),
            ModelError::Semantics(s) => s.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}
