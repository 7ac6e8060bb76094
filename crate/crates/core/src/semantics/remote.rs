use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingProvider, EmbeddingVector, Result, SemanticsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Base URL; requests go to `{base_url}/embed`.
    pub base_url: String,
    pub dim: usize,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Texts per request.
    #[serde(default = "default_batch")]
    pub batch_size: usize,
}

fn default_attempts() -> u32 {
    3
}
fn default_timeout_ms() -> u64 {
    30_000
}
fn default_backoff_ms() -> u64 {
    200
}
fn default_batch() -> usize {
    64
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, dim: usize) -> Self {
        Self {
            base_url: base_url.into(),
            dim,
            max_attempts: default_attempts(),
            timeout_ms: default_timeout_ms(),
            backoff_ms: default_backoff_ms(),
            batch_size: default_batch(),
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

/// Client for `POST /embed` with `{"texts": [...]}` in and
/// `{"dim": l, "vectors": [[...], ...]}` out. Any non-200 status counts as a
/// failed attempt.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    config: RemoteConfig,
    id: String,
    agent: ureq::Agent,
}

impl RemoteProvider {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build()
            .into();
        Self {
            id: format!("remote:{}", config.base_url),
            config,
            agent,
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/embed", self.config.base_url.trim_end_matches('/'))
    }

    fn request(&self, texts: &[&str]) -> std::result::Result<EmbedResponse, String> {
        let mut response = self
            .agent
            .post(&self.endpoint())
            .send_json(EmbedRequest { texts })
            .map_err(|e| e.to_string())?;
        response
            .body_mut()
            .read_json::<EmbedResponse>()
            .map_err(|e| e.to_string())
    }

    fn call(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let attempts = self.config.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.request(texts) {
                Ok(r) => return self.validate(texts, r),
                Err(e) => last = e,
            }
            if attempt < attempts {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms * attempt as u64));
            }
        }
        Err(SemanticsError::Transport {
            attempts,
            message: last,
        })
    }

    fn validate(&self, texts: &[&str], r: EmbedResponse) -> Result<Vec<EmbeddingVector>> {
        let expected = self.config.dim;
        if r.dim != expected {
            return Err(SemanticsError::Dimension {
                expected,
                found: r.dim,
                context: "service header".into(),
            });
        }
        if r.vectors.len() != texts.len() {
            return Err(SemanticsError::Transport {
                attempts: 1,
                message: format!("asked for {} vectors, got {}", texts.len(), r.vectors.len()),
            });
        }
        r.vectors
            .into_iter()
            .zip(texts)
            .map(|(v, key)| {
                if v.len() != expected {
                    return Err(SemanticsError::Dimension {
                        expected,
                        found: v.len(),
                        context: format!("{key:?}"),
                    });
                }
                EmbeddingVector::new(v, self.id.clone(), key)
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.config.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        Ok(self.call(&[text])?.remove(0))
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.config.batch_size.max(1)) {
            out.extend(self.call(chunk)?);
        }
        Ok(out)
    }
}
