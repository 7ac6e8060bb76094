use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::{EmbeddingProvider, EmbeddingVector, Result};

pub const DEFAULT_DIM: usize = 768;

/// Lowercased alphanumeric runs of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Token-hash embedder: every token maps to a fixed pseudo-random unit
/// vector and a text to the normalized mean of its tokens, so texts sharing
/// tokens point in similar directions.
#[derive(Debug, Clone)]
pub struct TestEmbedder {
    dim: usize,
    id: String,
}

impl TestEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            id: format!("test-embedder-{dim}"),
        }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let seed: [u8; 32] = Sha256::digest(token.as_bytes()).into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        normalize(&mut v);
        v
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let tokens = tokenize(text);
        let mut acc = vec![0.0; self.dim];
        for t in &tokens {
            for (a, x) in acc.iter_mut().zip(self.token_vector(t)) {
                *a += x;
            }
        }
        if !normalize(&mut acc) {
            acc.iter_mut().for_each(|a| *a = 0.0);
            acc[0] = 1.0;
        }
        acc
    }
}

impl Default for TestEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIM)
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 1e-300) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

impl EmbeddingProvider for TestEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        EmbeddingVector::new(self.vector(text), self.id.clone(), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_and_lowercases() {
        assert_eq!(tokenize("ProductID,int"), ["productid", "int"]);
        assert_eq!(tokenize("user_id NOT-NULL"), ["user", "id", "not", "null"]);
        assert!(tokenize(",,;").is_empty());
    }

    #[test]
    fn shared_tokens_are_closer() {
        let e = TestEmbedder::default();
        let a = e.embed("ProductID,int").unwrap();
        let b = e.embed("ProductID,string").unwrap();
        let c = e.embed("Zebra,bool").unwrap();
        assert!(a.cosine(&b) > a.cosine(&c));
    }

    #[test]
    fn deterministic_and_unit_norm() {
        let e = TestEmbedder::new(64);
        let a = e.vector("Date,timestamp");
        assert_eq!(a, e.vector("Date,timestamp"));
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_maps_to_first_basis_vector() {
        let v = TestEmbedder::new(5).vector("--");
        assert_eq!(v, [1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
