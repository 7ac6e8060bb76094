use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Exclusion, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
    Validation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl Default for SplitRatios {
    /// Roughly the table proportions 4003 / 1128 / 1267.
    fn default() -> Self {
        Self {
            train: 0.62,
            test: 0.18,
            validation: 0.20,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, test: f64, validation: f64) -> Self {
        Self {
            train,
            test,
            validation,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.test, self.validation]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub validation: Vec<String>,
}

impl Splits {
    pub fn get(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
            Split::Validation => &self.validation,
        }
    }
}

/// Split assignment plus ingestion bookkeeping, persisted as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub ratios: SplitRatios,
    pub splits: Splits,
    #[serde(default)]
    pub exclusions: Vec<Exclusion>,
    /// table id -> source CSV path, filled in by ingestion.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sources: BTreeMap<String, String>,
}

impl DatasetManifest {
    pub fn split_of(&self, table_id: &str) -> Option<Split> {
        [Split::Train, Split::Test, Split::Validation]
            .into_iter()
            .find(|&s| self.splits.get(s).iter().any(|id| id == table_id))
    }
}

/// Assigns whole tables to train/test/validation with a seeded shuffle.
///
/// Ids are sorted before shuffling so the result depends only on the id set
/// and the seed. Counts use largest-remainder rounding, then every split with
/// a positive ratio is guaranteed at least one table.
pub fn split_dataset<S: AsRef<str>>(table_ids: &[S], seed: u64, ratios: SplitRatios) -> Result<DatasetManifest> {
    let r = ratios.as_array();
    if r.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(CorpusError::Split(format!("ratios must be non-negative, got {r:?}")));
    }
    let total: f64 = r.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CorpusError::Split(format!("ratios sum to {total}, expected 1")));
    }
    let wanted = r.iter().filter(|x| **x > 0.0).count();
    if table_ids.len() < wanted.max(3) {
        return Err(CorpusError::Split(format!(
            "{} tables cannot fill {} splits",
            table_ids.len(),
            wanted.max(3)
        )));
    }

    let mut ids: Vec<String> = table_ids.iter().map(|s| s.as_ref().to_string()).collect();
    ids.sort();
    let before = ids.len();
    ids.dedup();
    if ids.len() != before {
        return Err(CorpusError::Split("duplicate table ids".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let counts = allocate(ids.len(), r);
    let mut rest = ids.into_iter();
    let mut take = |k: usize| rest.by_ref().take(k).collect::<Vec<_>>();
    let splits = Splits {
        train: take(counts[0]),
        test: take(counts[1]),
        validation: take(counts[2]),
    };
    Ok(DatasetManifest {
        seed,
        ratios,
        splits,
        exclusions: Vec::new(),
        sources: BTreeMap::new(),
    })
}

fn allocate(m: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * m as f64).collect();
    let mut counts = [0usize; 3];
    for i in 0..3 {
        counts[i] = exact[i].floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut left = m - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            counts[i] += 1;
            left -= 1;
        }
    }
    for i in 0..3 {
        if ratios[i] > 0.0 && counts[i] == 0 {
            let donor = (0..3).max_by_key(|&j| counts[j]).unwrap();
            counts[donor] -= 1;
            counts[i] += 1;
        }
    }
    counts
}
