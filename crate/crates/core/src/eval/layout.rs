//! Sensitivity of sequential-prefix estimates to physical data layout: a
//! column whose first rows repeat one value is progressively repaired by
//! overwriting prefix rows with values copied from further down.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::q_error;
use super::Result;
use crate::corpus::{exact_ndv, ColumnData};
use crate::estimators::{estimate_all, Method, SolverConfig};
use crate::ext_real;
use crate::profiles::{frequency_profile, sequential_sample};

pub const LAYOUT_ROWS: usize = 10_000;
pub const LAYOUT_SELECTIVITY: f64 = 0.7;
pub const CONSTANT_ROWS: usize = 3001;
pub const PREFIX_ROWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub method: Method,
    #[serde(rename = "D_hat", with = "ext_real::option")]
    pub estimate: Option<f64>,
    #[serde(with = "ext_real::option")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPoint {
    /// Prefix rows replaced so far.
    pub k: usize,
    #[serde(rename = "D")]
    pub d: u64,
    pub entries: Vec<LayoutEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSeries {
    pub seed: u64,
    pub rows: usize,
    pub points: Vec<LayoutPoint>,
}

impl LayoutSeries {
    pub fn q(&self, k: usize, method: Method) -> Option<f64> {
        self.points
            .get(k)?
            .entries
            .iter()
            .find(|e| e.method == method)
            .and_then(|e| e.q)
    }
}

/// The unrepaired column: 3001 copies of one value followed by 6999
/// distinct fillers in seeded order, `D = 0.7 N`.
pub fn layout_column(seed: u64) -> Vec<String> {
    let distinct = (LAYOUT_SELECTIVITY * LAYOUT_ROWS as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tail: Vec<String> = (1..distinct).map(|i| format!("filler-{i:05}")).collect();
    tail.shuffle(&mut rng);
    let mut values = vec!["office-0".to_string(); CONSTANT_ROWS];
    values.extend(tail);
    values
}

/// Estimates with every classical method after `k = 0..=100` cumulative
/// replacements. Replacement `k` overwrites row `k` with the value of a
/// uniformly drawn row among rows 101..10000 of the original column, and
/// the ground truth is recomputed for every `k`.
pub fn layout_experiment(seed: u64, solver: &SolverConfig) -> Result<LayoutSeries> {
    let original = layout_column(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut working = original.clone();
    let mut points = Vec::with_capacity(PREFIX_ROWS + 1);
    for k in 0..=PREFIX_ROWS {
        if k > 0 {
            let source = rng.random_range(PREFIX_ROWS..LAYOUT_ROWS);
            working[k - 1] = original[source].clone();
        }
        let column = ColumnData::new(working.clone());
        let d = exact_ndv(&column).expect("layout column is non-empty");
        let sample = sequential_sample(&column, PREFIX_ROWS).expect("column exceeds the prefix");
        let profile = frequency_profile(&sample);
        let entries = estimate_all(&profile, solver)
            .into_iter()
            .map(|o| {
                let estimate = o.estimate().map(|e| e.value);
                Ok(LayoutEntry {
                    method: o.method(),
                    estimate,
                    q: estimate.map(|v| q_error(v, d as f64)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(LayoutPoint { k, d, entries });
    }
    Ok(LayoutSeries {
        seed,
        rows: LAYOUT_ROWS,
        points,
    })
}
