//! Synthetic corpora whose NDV regime is announced by a column-name token.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ColumnData, ColumnSchema, TableRecord};

const QUALIFIERS: [&str; 16] = [
    "primary", "billing", "shipping", "legacy", "current", "parent", "source", "target", "region", "account", "vendor",
    "internal", "external", "backup", "origin", "partner",
];
const ENTITIES: [&str; 24] = [
    "customer",
    "order",
    "product",
    "user",
    "invoice",
    "employee",
    "store",
    "supplier",
    "payment",
    "shipment",
    "ticket",
    "device",
    "session",
    "branch",
    "contract",
    "vehicle",
    "patient",
    "course",
    "station",
    "warehouse",
    "member",
    "project",
    "asset",
    "claim",
];
const TYPES: [&str; 3] = ["int", "string", "big int"];
const PREFIX: usize = 100;

/// NDV regime announced by the last name token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `D ≈ N`.
    Id,
    /// `D ∈ {2, 3}`.
    Flag,
    /// `D ≈ √N`.
    Code,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Id, Regime::Flag, Regime::Code];

    pub fn token(self) -> &'static str {
        match self {
            Regime::Id => "id",
            Regime::Flag => "flag",
            Regime::Code => "code",
        }
    }
}

/// Physical order of a column's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// The first 100 rows hold a single value.
    ConstantPrefix,
    /// Equal values adjacent, ascending.
    Sorted,
    Shuffled,
}

impl Layout {
    pub const ALL: [Layout; 3] = [Layout::ConstantPrefix, Layout::Sorted, Layout::Shuffled];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Lower bound on the total number of columns.
    pub columns: usize,
    pub min_rows: usize,
    pub max_rows: usize,
    pub max_table_width: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            columns: 2000,
            min_rows: 300,
            max_rows: 3000,
            max_table_width: 5,
            seed: 0,
        }
    }
}

/// One generated table with the exact NDV of each column.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTable {
    pub table: TableRecord,
    pub truths: Vec<u64>,
    pub regimes: Vec<Regime>,
    pub layouts: Vec<Layout>,
}

fn value(i: usize) -> String {
    format!("v{i:06}")
}

fn distinct_target(regime: Regime, rows: usize, rng: &mut ChaCha8Rng) -> usize {
    match regime {
        Regime::Id => rows,
        Regime::Flag => rng.random_range(2..=3),
        Regime::Code => ((rows as f64).sqrt().round() as usize).max(2),
    }
}

/// Values of one column; returns them with the exact distinct count.
fn column_values(regime: Regime, layout: Layout, rows: usize, rng: &mut ChaCha8Rng) -> (Vec<String>, u64) {
    let d = distinct_target(regime, rows, rng);
    let mut ids: Vec<usize> = match layout {
        Layout::ConstantPrefix => {
            let prefix = PREFIX.min(rows);
            let rest = rows - prefix;
            let mut tail: Vec<usize> = if regime == Regime::Id {
                (1..=rest).collect()
            } else {
                (0..rest).map(|i| i % d).collect()
            };
            tail.shuffle(rng);
            let mut ids = vec![0; prefix];
            ids.extend(tail);
            ids
        }
        Layout::Sorted | Layout::Shuffled => {
            let mut ids: Vec<usize> = (0..rows).map(|i| i % d).collect();
            if layout == Layout::Shuffled {
                ids.shuffle(rng);
            } else {
                ids.sort_unstable();
            }
            ids
        }
    };
    if layout == Layout::Sorted {
        // Offset so sorted columns do not all start with the same value.
        let offset = rng.random_range(0..1000);
        ids.iter_mut().for_each(|v| *v += offset);
    }
    let mut seen = ids.clone();
    seen.sort_unstable();
    seen.dedup();
    (ids.into_iter().map(value).collect(), seen.len() as u64)
}

fn column_name(regime: Regime, rng: &mut ChaCha8Rng) -> String {
    let entity = ENTITIES[rng.random_range(0..ENTITIES.len())];
    if rng.random_bool(0.5) {
        let qualifier = QUALIFIERS[rng.random_range(0..QUALIFIERS.len())];
        format!("{qualifier}_{entity}_{}", regime.token())
    } else {
        format!("{entity}_{}", regime.token())
    }
}

/// Deterministic corpus of tables with mixed regimes and layouts.
pub fn semantic_corpus(spec: &SyntheticSpec) -> Vec<SyntheticTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut tables = Vec::new();
    let mut total = 0;
    while total < spec.columns {
        let width = rng.random_range(1..=spec.max_table_width.max(1));
        let rows = rng.random_range(spec.min_rows.max(1)..=spec.max_rows.max(spec.min_rows.max(1)));
        let mut schemas = Vec::with_capacity(width);
        let mut columns = Vec::with_capacity(width);
        let mut truths = Vec::with_capacity(width);
        let mut regimes = Vec::with_capacity(width);
        let mut layouts = Vec::with_capacity(width);
        while schemas.len() < width {
            let regime = Regime::ALL[rng.random_range(0..3)];
            let name = column_name(regime, &mut rng);
            if schemas.iter().any(|s: &ColumnSchema| s.name == name) {
                continue;
            }
            let layout = Layout::ALL[rng.random_range(0..3)];
            let (values, d) = column_values(regime, layout, rows, &mut rng);
            schemas.push(ColumnSchema::new(name, TYPES[rng.random_range(0..TYPES.len())]));
            columns.push(ColumnData::new(values));
            truths.push(d);
            regimes.push(regime);
            layouts.push(layout);
        }
        total += width;
        let id = format!("synthetic_{:05}", tables.len());
        tables.push(SyntheticTable {
            table: TableRecord::new(id, schemas, columns).expect("generated tables are rectangular"),
            truths,
            regimes,
            layouts,
        });
    }
    tables
}
