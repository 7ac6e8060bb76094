use std::path::Path;

use ndv_core::model::CHECKPOINT_FORMAT;
use ndv_core::semantics::FORMAT_TAG;
use serde::Serialize;

use crate::cli::Cli;
use crate::dataset::write_atomic;
use crate::error::{CliError, Result};

pub const METADATA_FILE: &str = "run-metadata.json";

#[derive(Serialize)]
struct Versions {
    ndv: &'static str,
    checkpoint_format: &'static str,
    embedding_format: &'static str,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    command: &'static str,
    seed: Option<u64>,
    config: Option<String>,
    /// Effective flags after the config overlay.
    args: &'a Cli,
    versions: Versions,
}

pub fn write(cli: &Cli, dir: &Path) -> Result<()> {
    let meta = RunMetadata {
        command: cli.command.name(),
        seed: cli.command.seed(),
        config: cli.config.as_ref().map(|p| p.display().to_string()),
        args: cli,
        versions: Versions {
            ndv: env!("CARGO_PKG_VERSION"),
            checkpoint_format: CHECKPOINT_FORMAT,
            embedding_format: FORMAT_TAG,
        },
    };
    let json = serde_json::to_vec_pretty(&meta).map_err(CliError::data)?;
    write_atomic(&dir.join(METADATA_FILE), &json)
}
