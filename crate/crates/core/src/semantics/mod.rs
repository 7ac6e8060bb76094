//! Column schemas as text, and text as fixed-length vectors.
//!
//! A column's schema is serialized by comma-joining its name, declared type,
//! constraints and comment (absent parts are skipped). The text is then
//! handed to an [`EmbeddingProvider`]. Three providers ship with the crate:
//!
//! - [`EmbeddingStore`]: a lookup table loaded from an `ndv-emb-v1` file,
//!   typically produced offline by a frozen sentence encoder.
//! - [`RemoteProvider`]: a small JSON-over-HTTP protocol.
//! - [`TestEmbedder`]: deterministic token hashing, no model required.
//!
//! Serialization is not injective when a field itself contains a comma;
//! `"a,b" + "c"` and `"a" + "b,c"` produce the same text.

mod remote;
mod store;
mod test_embedder;

use ndarray::Array2;
use thiserror::Error;

use crate::corpus::{ColumnSchema, TableRecord};

pub use remote::{RemoteConfig, RemoteProvider};
pub use store::{EmbeddingStore, StoreHeader, FORMAT_TAG};
pub use test_embedder::{tokenize, TestEmbedder, DEFAULT_DIM};

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("column schema is missing its {0}")]
    MissingField(&'static str),
    #[error("no embedding stored for {0:?}")]
    Lookup(String),
    #[error("embedding service failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("embedding dimension mismatch: expected {expected}, found {found} ({context})")]
    Dimension {
        expected: usize,
        found: usize,
        context: String,
    },
    #[error("embedding for {0:?} has a non-finite entry")]
    NonFinite(String),
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("column {index}: {source}")]
    Column {
        index: usize,
        #[source]
        source: Box<SemanticsError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SemanticsError> = std::result::Result<T, E>;

/// The serialized form of a column schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnText {
    pub text: String,
    pub source: ColumnSchema,
}

impl ColumnText {
    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl std::fmt::Display for ColumnText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn serialize_column(schema: &ColumnSchema) -> Result<ColumnText> {
    if schema.name.is_empty() {
        return Err(SemanticsError::MissingField("name"));
    }
    if schema.declared_type.is_empty() {
        return Err(SemanticsError::MissingField("type"));
    }
    let mut parts = vec![schema.name.as_str(), schema.declared_type.as_str()];
    parts.extend(schema.constraints.as_deref().filter(|s| !s.is_empty()));
    parts.extend(schema.comment.as_deref().filter(|s| !s.is_empty()));
    Ok(ColumnText {
        text: parts.join(","),
        source: schema.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub provider_id: String,
}

impl EmbeddingVector {
    /// Rejects vectors with non-finite entries; `key` is only used in the error.
    pub fn new(values: Vec<f64>, provider_id: impl Into<String>, key: &str) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SemanticsError::NonFinite(key.to_owned()));
        }
        Ok(Self {
            values,
            provider_id: provider_id.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        let na: f64 = self.values.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nb: f64 = other.values.iter().map(|b| b * b).sum::<f64>().sqrt();
        dot / (na * nb)
    }
}

pub trait EmbeddingProvider: Send + Sync {
    /// Tag recorded in embedding files and vectors.
    fn id(&self) -> &str;

    fn dim(&self) -> usize;

    fn embed(&self, text: &str) -> Result<EmbeddingVector>;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        (**self).embed(text)
    }
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        (**self).embed_batch(texts)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        (**self).embed(text)
    }
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        (**self).embed_batch(texts)
    }
}

/// Embeds one serialized column, checking the provider's dimension.
pub fn embed(text: &ColumnText, provider: &dyn EmbeddingProvider) -> Result<EmbeddingVector> {
    let v = provider.embed(text.as_str())?;
    check_dim(&v, provider.dim(), text.as_str())?;
    Ok(v)
}

fn check_dim(v: &EmbeddingVector, expected: usize, key: &str) -> Result<()> {
    if v.dim() != expected {
        return Err(SemanticsError::Dimension {
            expected,
            found: v.dim(),
            context: format!("{key:?}"),
        });
    }
    Ok(())
}

/// Serialized texts of every column, in column order.
pub fn table_texts(table: &TableRecord) -> Result<Vec<ColumnText>> {
    table
        .schemas()
        .iter()
        .enumerate()
        .map(|(index, s)| {
            serialize_column(s).map_err(|e| SemanticsError::Column {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Stacks the embeddings of a table's columns into a `t x l` matrix.
pub fn embed_table(table: &TableRecord, provider: &dyn EmbeddingProvider) -> Result<Array2<f64>> {
    let texts: Vec<String> = table_texts(table)?.into_iter().map(|t| t.text).collect();
    embed_texts(&texts, provider)
}

/// Stacks the embeddings of arbitrary texts, one row per text.
pub fn embed_texts<S: AsRef<str>>(texts: &[S], provider: &dyn EmbeddingProvider) -> Result<Array2<f64>> {
    let refs: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    let l = provider.dim();
    let vectors = provider.embed_batch(&refs)?;
    if vectors.len() != refs.len() {
        return Err(SemanticsError::Dimension {
            expected: refs.len(),
            found: vectors.len(),
            context: "vector count".into(),
        });
    }
    let mut x = Array2::zeros((refs.len(), l));
    for (index, (v, key)) in vectors.iter().zip(&refs).enumerate() {
        check_dim(v, l, key).map_err(|e| SemanticsError::Column {
            index,
            source: Box::new(e),
        })?;
        x.row_mut(index).assign(&ndarray::ArrayView1::from(&v.values[..]));
    }
    Ok(x)
}
