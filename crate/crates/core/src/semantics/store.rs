use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmbeddingProvider, EmbeddingVector, Result, SemanticsError};

pub const FORMAT_TAG: &str = "ndv-emb-v1";

/// First line of an embedding file. Fields beyond the required three are
/// kept verbatim (the exporter records its model tag and truncation counts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub format: String,
    pub dim: usize,
    pub provider: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct Record<'a> {
    #[serde(borrow)]
    key: std::borrow::Cow<'a, str>,
    dim: usize,
    vec: Vec<f64>,
}

/// Embeddings keyed by the exact serialized column text.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    header: StoreHeader,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, provider: impl Into<String>, model: Option<String>) -> Self {
        Self {
            header: StoreHeader {
                format: FORMAT_TAG.into(),
                dim,
                provider: provider.into(),
                model,
                extra: BTreeMap::new(),
            },
            entries: BTreeMap::new(),
        }
    }

    /// Embeds every distinct text with `provider` and stores the result.
    pub fn build<S: AsRef<str>>(provider: &dyn EmbeddingProvider, texts: &[S]) -> Result<Self> {
        let mut store = Self::new(provider.dim(), provider.id(), None);
        let mut unique: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
        unique.sort_unstable();
        unique.dedup();
        for (key, v) in unique.iter().zip(provider.embed_batch(&unique)?) {
            store.insert(key, v.values)?;
        }
        Ok(store)
    }

    pub fn header(&self) -> &StoreHeader {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Adds an entry. Re-inserting an identical vector is a no-op; a
    /// conflicting vector for an existing key is rejected.
    pub fn insert(&mut self, key: &str, vec: Vec<f64>) -> Result<()> {
        if vec.len() != self.header.dim {
            return Err(SemanticsError::Dimension {
                expected: self.header.dim,
                found: vec.len(),
                context: format!("{key:?}"),
            });
        }
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(SemanticsError::NonFinite(key.to_owned()));
        }
        match self.entries.get(key) {
            Some(existing) if *existing == vec => Ok(()),
            Some(_) => Err(SemanticsError::Format {
                path: "<store>".into(),
                line: 0,
                message: format!("conflicting vectors for key {key:?}"),
            }),
            None => {
                self.entries.insert(key.to_owned(), vec);
                Ok(())
            }
        }
    }

    /// Fraction of `keys` present in the store.
    pub fn hit_rate<S: AsRef<str>>(&self, keys: &[S]) -> f64 {
        if keys.is_empty() {
            return 1.0;
        }
        let hits = keys.iter().filter(|k| self.contains(k.as_ref())).count();
        hits as f64 / keys.len() as f64
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::read(BufReader::new(file), &path.display().to_string())
    }

    /// Parses and validates an `ndv-emb-v1` stream. `source` names the input in errors.
    pub fn read<R: Read>(input: R, source: &str) -> Result<Self> {
        let fail = |line: usize, message: String| SemanticsError::Format {
            path: source.to_owned(),
            line,
            message,
        };
        let mut lines = BufReader::new(input).lines().enumerate();
        let header: StoreHeader = loop {
            match lines.next() {
                None => return Err(fail(1, "missing header line".into())),
                Some((i, line)) => {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break serde_json::from_str(&line).map_err(|e| fail(i + 1, e.to_string()))?;
                }
            }
        };
        if header.format != FORMAT_TAG {
            return Err(fail(1, format!("unsupported format {:?}", header.format)));
        }
        if header.dim == 0 {
            return Err(fail(1, "dimension must be positive".into()));
        }
        let mut store = Self {
            header,
            entries: BTreeMap::new(),
        };
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record<'_> = serde_json::from_str(&line).map_err(|e| fail(i + 1, e.to_string()))?;
            if record.dim != store.header.dim || record.vec.len() != store.header.dim {
                return Err(fail(
                    i + 1,
                    format!(
                        "dimension mismatch: header {}, record {}, vector {}",
                        store.header.dim,
                        record.dim,
                        record.vec.len()
                    ),
                ));
            }
            store
                .insert(&record.key, record.vec)
                .map_err(|e| fail(i + 1, e.to_string()))?;
        }
        Ok(store)
    }

    /// Writes header then records in key order.
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        serde_json::to_writer(&mut out, &self.header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for (key, vec) in &self.entries {
            let record = Record {
                key: key.as_str().into(),
                dim: self.header.dim,
                vec: vec.clone(),
            };
            serde_json::to_writer(&mut out, &record).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        self.write(File::create(&tmp)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

impl EmbeddingProvider for EmbeddingStore {
    fn id(&self) -> &str {
        &self.header.provider
    }

    fn dim(&self) -> usize {
        self.header.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let v = self.get(text).ok_or_else(|| SemanticsError::Lookup(text.to_owned()))?;
        Ok(EmbeddingVector {
            values: v.to_vec(),
            provider_id: self.header.provider.clone(),
        })
    }
}
