//! The learned estimator.
//!
//! Column embeddings of a table pass through multi-head self-attention; each
//! column's embedding plus its attended vector is concatenated with `ln N`
//! and (optionally) the cut-off frequency profile, and an MLP regresses
//! `ln D`. Training minimizes the mean squared log error with Adam.

mod ablation;
mod adam;
mod attention;
mod checkpoint;
mod mlp;
mod network;
mod params;
mod pipeline;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ablation::{permute_table_texts, permute_text};
pub use adam::{Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
pub use network::{
    activation_pattern, assemble_features, column_interaction, forward, loss, loss_and_gradients, predict_log,
    ColumnFeatures, TableInput,
};
pub use params::{AttentionLayer, Dense, ModelParams};
pub use pipeline::{model_texts, predict, prepare_table, prepare_tables, PreparedTable, ProfileAccess};
pub use train::{train, write_log, EpochLog, TrainConfig, TrainOutcome};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid ground truth: {0}")]
    Truth(String),
    #[error("missing embeddings for {} column text(s): {}", .0.len(), preview(.0))]
    MissingEmbeddings(Vec<String>),
    #[error(transparent)]
    Semantics(#[from] crate::semantics::SemanticsError),
    #[error(transparent)]
    Profile(#[from] crate::profiles::ProfileError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn preview(keys: &[String]) -> String {
    let mut s: Vec<String> = keys.iter().take(5).map(|k| format!("{k:?}")).collect();
    if keys.len() > 5 {
        s.push(format!("... and {} more", keys.len() - 5));
    }
    s.join(", ")
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Which inputs the MLP sees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    Full,
    /// Attended vector only, no raw column embedding.
    WoCol,
    /// Raw embedding only, no attention.
    WoTab,
    /// Neither: `ln N` and the profile only.
    WoTabAndCol,
    /// Full model on character-shuffled column texts.
    PermuteCol,
    /// Full model with texts shuffled across the columns of each table.
    PermuteTab,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::Full,
        Ablation::WoCol,
        Ablation::WoTab,
        Ablation::WoTabAndCol,
        Ablation::PermuteCol,
        Ablation::PermuteTab,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::WoCol => "wo_col",
            Ablation::WoTab => "wo_tab",
            Ablation::WoTabAndCol => "wo_tab_and_col",
            Ablation::PermuteCol => "permute_col",
            Ablation::PermuteTab => "permute_tab",
        }
    }

    pub(crate) fn uses_attention(self) -> bool {
        !matches!(self, Ablation::WoTab | Ablation::WoTabAndCol)
    }

    pub(crate) fn uses_semantics(self) -> bool {
        self != Ablation::WoTabAndCol
    }
}

impl std::fmt::Display for Ablation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown ablation {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Embedding dimension.
    pub l: usize,
    pub heads: usize,
    pub layers: usize,
    /// Profile cut-off length.
    pub k: usize,
    /// `false` selects the no-data model, which never sees a profile.
    pub use_stats: bool,
    pub hidden: Vec<usize>,
    pub ablation: Ablation,
    /// Feed `ln(1 + f_j)` instead of raw counts.
    pub profile_log1p: bool,
    pub layer_norm: bool,
    /// Dropout on attention weights during training.
    pub attention_dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            l: crate::semantics::DEFAULT_DIM,
            heads: 8,
            layers: 1,
            k: crate::profiles::DEFAULT_CUTOFF,
            use_stats: true,
            hidden: vec![384, 128, 64],
            ablation: Ablation::Full,
            profile_log1p: false,
            layer_norm: false,
            attention_dropout: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(ModelError::Config(m));
        if self.l == 0 {
            return fail("embedding dimension must be positive".into());
        }
        if self.heads == 0 || self.l % self.heads != 0 {
            return fail(format!("l={} is not divisible by heads={}", self.l, self.heads));
        }
        if self.layers == 0 {
            return fail("at least one attention layer is required".into());
        }
        if self.use_stats && self.k == 0 {
            return fail("profile cut-off must be positive".into());
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return fail("hidden sizes must be positive".into());
        }
        if !(0.0..1.0).contains(&self.attention_dropout) {
            return fail("attention dropout must lie in [0, 1)".into());
        }
        Ok(())
    }

    pub(crate) fn attention_layers(&self) -> usize {
        if self.ablation.uses_attention() {
            self.layers
        } else {
            0
        }
    }

    pub(crate) fn semantic_len(&self) -> usize {
        if self.ablation.uses_semantics() {
            self.l
        } else {
            0
        }
    }

    /// Profile entries per column: `k` with statistics, otherwise none.
    pub fn profile_len(&self) -> usize {
        if self.use_stats {
            self.k
        } else {
            0
        }
    }

    /// MLP input width: semantic block, `ln N`, profile.
    pub fn feature_len(&self) -> usize {
        self.semantic_len() + 1 + self.profile_len()
    }
}
