//! Sample acquisition (sequential prefix or uniform random) and frequency
//! profiles, the sufficient statistic every sampling estimator consumes.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{ColumnData, EmptyCells};

/// Feature length used by the learned estimator.
pub const DEFAULT_CUTOFF: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("sample size {n} exceeds the column's {rows} rows")]
    SampleTooLarge { n: usize, rows: usize },
    #[error("inconsistent profile: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    Sequential,
    Random,
}

/// Values drawn from one column.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<'a> {
    pub items: Vec<&'a str>,
    pub mode: AccessMode,
    pub seed: Option<u64>,
    /// Row count of the parent column.
    pub population: usize,
}

impl Sample<'_> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The first `n` rows in physical order. `n = 0` reads nothing.
pub fn sequential_sample(column: &ColumnData, n: usize) -> Result<Sample<'_>, ProfileError> {
    let rows = column.row_count();
    if n > rows {
        return Err(ProfileError::SampleTooLarge { n, rows });
    }
    let items = if n == 0 {
        Vec::new()
    } else {
        column.prefix(n).iter().map(String::as_str).collect()
    };
    Ok(Sample {
        items,
        mode: AccessMode::Sequential,
        seed: None,
        population: rows,
    })
}

/// `n` rows drawn uniformly without replacement, in draw order.
pub fn random_sample(column: &ColumnData, n: usize, seed: u64) -> Result<Sample<'_>, ProfileError> {
    let rows = column.row_count();
    if n > rows {
        return Err(ProfileError::SampleTooLarge { n, rows });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, rows, n);
    let items = indices
        .iter()
        .map(|i| column.get(i).expect("index drawn below the row count"))
        .collect();
    Ok(Sample {
        items,
        mode: AccessMode::Random,
        seed: Some(seed),
        population: rows,
    })
}

/// Sample size as a row count or as a fraction of the column's rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSize {
    Rows(usize),
    /// In `(0, 1]`; resolves to `max(1, round(fraction * N))`.
    Fraction(f64),
}

impl SampleSize {
    pub fn validate(self) -> Result<(), ProfileError> {
        match self {
            SampleSize::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(ProfileError::Inconsistent(format!(
                "sampling fraction {f} is outside (0, 1]"
            ))),
            _ => Ok(()),
        }
    }

    /// Concrete `n` for a column of `rows` rows; row counts are capped at `rows`.
    pub fn resolve(self, rows: usize) -> usize {
        match self {
            SampleSize::Rows(n) => n.min(rows),
            SampleSize::Fraction(f) => ((f * rows as f64).round() as usize).clamp(1, rows.max(1)),
        }
    }
}

impl std::fmt::Display for SampleSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleSize::Rows(n) => write!(f, "{n}"),
            SampleSize::Fraction(x) => write!(f, "{}%", x * 100.0),
        }
    }
}

impl std::str::FromStr for SampleSize {
    type Err = String;

    /// `"100"` is a row count; `"0.01"` or `"1%"` a fraction.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let size = if let Some(p) = s.strip_suffix('%') {
            let v: f64 = p.trim().parse().map_err(|_| format!("bad percentage {s:?}"))?;
            SampleSize::Fraction(v / 100.0)
        } else if let Ok(n) = s.parse::<usize>() {
            SampleSize::Rows(n)
        } else {
            SampleSize::Fraction(s.parse().map_err(|_| format!("bad sample size {s:?}"))?)
        };
        size.validate().map_err(|e| e.to_string())?;
        Ok(size)
    }
}

/// Draws a sample of the requested size with the given access pattern.
pub fn draw_sample(
    column: &ColumnData,
    mode: AccessMode,
    size: SampleSize,
    seed: u64,
) -> Result<Sample<'_>, ProfileError> {
    size.validate()?;
    let n = size.resolve(column.row_count());
    match mode {
        AccessMode::Sequential => sequential_sample(column, n),
        AccessMode::Random => random_sample(column, n, seed),
    }
}

/// Per-column sampling seed derived from a run seed, so each column of each
/// table draws an independent sample.
pub fn column_seed(seed: u64, table_id: &str, column: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(table_id.as_bytes());
    h.update([0]);
    h.update((column as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Row count as maintained by table metadata; never reads cell values.
pub fn table_row_count(column: &ColumnData) -> usize {
    column.row_count()
}

/// Frequency of frequencies of a sample: `f[j]` distinct values seen exactly
/// `j` times. Stored sparsely; `n`, `d`, `N` and `r = n / N` are carried along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct FrequencyProfile {
    f: BTreeMap<u64, u64>,
    n: u64,
    d: u64,
    population: u64,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    n: u64,
    d: u64,
    #[serde(rename = "N")]
    population: u64,
    r: f64,
    f: BTreeMap<u64, u64>,
}

impl TryFrom<RawProfile> for FrequencyProfile {
    type Error = ProfileError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        let profile = FrequencyProfile::from_frequencies(raw.f, raw.population)?;
        if profile.n != raw.n || profile.d != raw.d {
            return Err(ProfileError::Inconsistent(format!(
                "stated n={}, d={} but f implies n={}, d={}",
                raw.n, raw.d, profile.n, profile.d
            )));
        }
        Ok(profile)
    }
}

impl From<FrequencyProfile> for RawProfile {
    fn from(p: FrequencyProfile) -> Self {
        RawProfile {
            n: p.n,
            d: p.d,
            population: p.population,
            r: p.r(),
            f: p.f,
        }
    }
}

impl FrequencyProfile {
    /// Builds a profile from `(j, f_j)` pairs; zero entries are dropped.
    pub fn from_frequencies<I>(frequencies: I, population: u64) -> Result<Self, ProfileError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut f = BTreeMap::new();
        for (j, count) in frequencies {
            if j == 0 {
                if count != 0 {
                    return Err(ProfileError::Inconsistent("f_0 must be zero".into()));
                }
                continue;
            }
            if count > 0 {
                *f.entry(j).or_insert(0) += count;
            }
        }
        let n: u64 = f.iter().map(|(j, c)| j * c).sum();
        let d: u64 = f.values().sum();
        if n > population {
            return Err(ProfileError::Inconsistent(format!(
                "sample size {n} exceeds population {population}"
            )));
        }
        Ok(Self { f, n, d, population })
    }

    /// Builds a profile from per-distinct-value sample counts `n_j`.
    pub fn from_value_counts(counts: &[u64], population: u64) -> Result<Self, ProfileError> {
        let mut f: BTreeMap<u64, u64> = BTreeMap::new();
        for &c in counts.iter().filter(|c| **c > 0) {
            *f.entry(c).or_insert(0) += 1;
        }
        Self::from_frequencies(f, population)
    }

    pub fn empty(population: u64) -> Self {
        Self {
            f: BTreeMap::new(),
            n: 0,
            d: 0,
            population,
        }
    }

    /// `f_j`; zero for absent classes.
    pub fn f(&self, j: u64) -> u64 {
        self.f.get(&j).copied().unwrap_or(0)
    }

    pub fn f1(&self) -> u64 {
        self.f(1)
    }

    pub fn f2(&self) -> u64 {
        self.f(2)
    }

    /// Sample size.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Distinct values in the sample.
    pub fn d(&self) -> u64 {
        self.d
    }

    /// Column size `N`.
    pub fn population(&self) -> u64 {
        self.population
    }

    /// Sampling rate `n / N` (zero for an empty column).
    pub fn r(&self) -> f64 {
        if self.population == 0 {
            0.0
        } else {
            self.n as f64 / self.population as f64
        }
    }

    /// Non-zero `(j, f_j)` pairs in ascending `j`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.f.iter().map(|(j, c)| (*j, *c))
    }

    pub fn max_frequency(&self) -> u64 {
        self.f.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Exact frequency profile of a sample.
pub fn frequency_profile(sample: &Sample<'_>) -> FrequencyProfile {
    frequency_profile_with(sample, EmptyCells::Keep)
}

pub fn frequency_profile_with(sample: &Sample<'_>, empty: EmptyCells) -> FrequencyProfile {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for item in sample.items.iter().filter(|v| empty.admits(v)) {
        *counts.entry(item).or_insert(0) += 1;
    }
    let mut f: BTreeMap<u64, u64> = BTreeMap::new();
    for c in counts.into_values() {
        *f.entry(c).or_insert(0) += 1;
    }
    FrequencyProfile::from_frequencies(f, sample.population as u64).expect("a sample never exceeds its parent column")
}

/// Dense `[f_1, .., f_K]`, zero-padded; classes above `K` are dropped.
pub fn profile_cutoff(profile: &FrequencyProfile, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    for (j, count) in profile.iter() {
        if (j as usize) <= k {
            v[j as usize - 1] = count as f64;
        }
    }
    v
}
