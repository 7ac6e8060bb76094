use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn rng_for(seed: u64, salt: &str, key: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(salt.as_bytes());
    h.update([0]);
    h.update(key.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Seeded character shuffle. Identical texts get identical anagrams.
pub fn permute_text(text: &str, seed: u64) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    chars.shuffle(&mut rng_for(seed, "permute_col", text));
    chars.into_iter().collect()
}

/// Seeded shuffle of which column receives which text, per table.
pub fn permute_table_texts(texts: &[String], seed: u64, table_id: &str) -> Vec<String> {
    let mut out = texts.to_vec();
    out.shuffle(&mut rng_for(seed, "permute_tab", table_id));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anagram_preserves_multiset() {
        let p = permute_text("EmployeeID,int", 7);
        assert_eq!(p.len(), "EmployeeID,int".len());
        let mut a: Vec<char> = p.chars().collect();
        let mut b: Vec<char> = "EmployeeID,int".chars().collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        assert_ne!(p, "EmployeeID,int");
        assert_eq!(p, permute_text("EmployeeID,int", 7));
    }

    #[test]
    fn single_column_table_is_identity() {
        let texts = vec!["a,int".to_string()];
        assert_eq!(permute_table_texts(&texts, 3, "t"), texts);
    }

    #[test]
    fn table_shuffle_is_a_permutation() {
        let texts: Vec<String> = (0..6).map(|i| format!("c{i},int")).collect();
        let mut p = permute_table_texts(&texts, 3, "t");
        assert_eq!(p, permute_table_texts(&texts, 3, "t"));
        p.sort();
        assert_eq!(p, texts);
    }
}
