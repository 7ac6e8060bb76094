use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ndv_core::eval::ReportFormat;
use ndv_core::model::Ablation;
use ndv_core::profiles::{AccessMode, SampleSize};
use serde::Serialize;

/// NDV estimation under minimal data access.
///
/// Every subcommand accepts `--config FILE`, a JSON object whose keys are
/// long flag names. Keys under a subcommand's name (for example
/// `{"train": {"epochs": 20}}`) apply only to that subcommand. Flags given
/// on the command line override the file.
#[derive(Debug, Parser, Serialize)]
#[command(name = "ndv", version, args_override_self = true)]
pub struct Cli {
    /// JSON config overlay.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Load CSV tables, filter columns, split the dataset and compute exact NDVs.
    Ingest(IngestArgs),
    /// Estimate every column of a split and report q-errors.
    Estimate(EstimateArgs),
    /// Train the learned estimator.
    Train(TrainArgs),
    /// Run the synthetic data-layout experiment.
    Layout(LayoutArgs),
    /// Column texts and embedding stores.
    #[command(subcommand)]
    Embed(EmbedCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Estimate(_) => "estimate",
            Command::Train(_) => "train",
            Command::Layout(_) => "layout",
            Command::Embed(EmbedCommand::Export(_)) => "embed export",
            Command::Embed(EmbedCommand::Import(_)) => "embed import",
            Command::Embed(EmbedCommand::Generate(_)) => "embed generate",
        }
    }

    pub fn out_dir(&self) -> Option<&PathBuf> {
        match self {
            Command::Ingest(a) => Some(&a.out),
            Command::Estimate(a) => Some(&a.out),
            Command::Train(a) => Some(&a.out),
            Command::Layout(a) => Some(&a.out),
            Command::Embed(_) => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Ingest(a) => Some(a.seed),
            Command::Estimate(a) => Some(a.seed),
            Command::Train(a) => Some(a.seed),
            Command::Layout(a) => Some(a.seed),
            Command::Embed(EmbedCommand::Export(a)) => Some(a.seed),
            Command::Embed(EmbedCommand::Import(a)) => Some(a.seed),
            Command::Embed(EmbedCommand::Generate(_)) => None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// CSV files with a header row; `<file>.schema.json` sidecars are picked up.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Output directory for the manifest and ground truth.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train, test and validation fractions.
    #[arg(long, value_delimiter = ',', default_value = "0.62,0.18,0.20")]
    pub ratios: Vec<f64>,
    /// Ignore empty cells when counting distinct values.
    #[arg(long)]
    pub drop_empty: bool,
}

/// Where column embeddings come from.
#[derive(Debug, Args, Serialize, Default)]
pub struct ProviderArgs {
    /// Embedding store in the ndv-emb-v1 format.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["embed_url", "test_embedder"])]
    pub embeddings: Option<PathBuf>,
    /// Base URL of an embedding service answering `POST /embed`.
    #[arg(long, requires = "embed_dim", conflicts_with = "test_embedder")]
    pub embed_url: Option<String>,
    /// Vector length returned by `--embed-url`.
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Use the deterministic hashing embedder with this dimension.
    #[arg(long, value_name = "DIM")]
    pub test_embedder: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    /// Manifest written by `ndv ingest`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Ground truth file; defaults to `ground_truth.jsonl` next to the manifest.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Sequential)]
    pub mode: ModeArg,
    /// Rows to sample: a count (`100`), a fraction (`0.01`) or a percentage (`1%`).
    #[arg(long, default_value = "100")]
    pub n: SampleSize,
    /// Comma-separated estimator names, `learned:<name>`, or one of the sets
    /// `all-classical`, `learned`, `learned-nodata`, `all`.
    #[arg(long, value_delimiter = ',', default_value = "all-classical")]
    pub methods: Vec<String>,
    /// Learned checkpoint as `name=path`; repeatable.
    #[arg(long = "checkpoint", value_name = "NAME=PATH")]
    pub checkpoints: Vec<String>,
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Clamp estimates into `[max(d, 1), N]` before scoring.
    #[arg(long)]
    pub clamp: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-table estimation.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[arg(long, value_enum, default_value_t = AblationArg::Full)]
    pub ablation: AblationArg,
    /// Feed the frequency profile to the model; `false` trains the no-data model.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub use_stats: bool,
    #[arg(long, default_value_t = 8)]
    pub heads: usize,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    /// Profile entries `f_1..f_k` fed to the model.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// MLP hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "384,128,64")]
    pub hidden: Vec<usize>,
    #[arg(long)]
    pub profile_log1p: bool,
    #[arg(long)]
    pub layer_norm: bool,
    #[arg(long, default_value_t = 0.0)]
    pub attention_dropout: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Columns per gradient step.
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Stop after this many epochs without validation improvement.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Sequential)]
    pub mode: ModeArg,
    #[arg(long, default_value = "100")]
    pub n: SampleSize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LayoutArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedCommand {
    /// Write the serialized column texts of a dataset, one per line.
    Export(ExportArgs),
    /// Validate an embedding store and report its coverage.
    Import(ImportArgs),
    /// Embed a texts file with the deterministic test embedder.
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Also export the texts this ablation feeds to the encoder.
    #[arg(long, value_enum, default_value_t = AblationArg::Full)]
    pub ablation: AblationArg,
    /// Seed of the ablation's text shuffles; must match training.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportArgs {
    /// ndv-emb-v1 store produced by an external encoder.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Measure coverage against the column texts of this dataset.
    #[arg(long, conflicts_with = "texts")]
    pub manifest: Option<PathBuf>,
    /// Measure coverage against a texts file, one text per line.
    #[arg(long)]
    pub texts: Option<PathBuf>,
    /// Ablation whose texts `--manifest` coverage is measured for.
    #[arg(long, value_enum, default_value_t = AblationArg::Full)]
    pub ablation: AblationArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fail unless every text has a vector.
    #[arg(long)]
    pub require_complete: bool,
    /// Install the validated store at this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitArg {
    Train,
    Test,
    Validation,
}

impl From<SplitArg> for ndv_core::corpus::Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Self::Train,
            SplitArg::Test => Self::Test,
            SplitArg::Validation => Self::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Sequential,
    Random,
}

impl From<ModeArg> for AccessMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sequential => AccessMode::Sequential,
            ModeArg::Random => AccessMode::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AblationArg {
    Full,
    WoCol,
    WoTab,
    WoTabAndCol,
    PermuteCol,
    PermuteTab,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Full => Ablation::Full,
            AblationArg::WoCol => Ablation::WoCol,
            AblationArg::WoTab => Ablation::WoTab,
            AblationArg::WoTabAndCol => Ablation::WoTabAndCol,
            AblationArg::PermuteCol => Ablation::PermuteCol,
            AblationArg::PermuteTab => Ablation::PermuteTab,
        }
    }
}

/// Report formats written by every reporting subcommand, with their extensions.
pub const REPORT_FORMATS: [(ReportFormat, &str); 2] = [(ReportFormat::Json, "json"), (ReportFormat::Csv, "csv")];
