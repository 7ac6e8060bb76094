use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::metrics::{q_error, Aggregate};
use super::{EvalError, Result};
use crate::corpus::{EmptyCells, TableRecord};
use crate::estimators::{clamp_estimate, estimate_all, EstimateOutcome, Method, SolverConfig};
use crate::ext_real;
use crate::model::{predict, Checkpoint, ModelError, ProfileAccess};
use crate::profiles::{column_seed, draw_sample, frequency_profile_with, AccessMode, SampleSize};
use crate::semantics::{EmbeddingProvider, SemanticsError};

/// A classical estimator or a named learned checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Classical(Method),
    Learned(String),
}

impl MethodId {
    pub fn all_classical() -> Vec<MethodId> {
        Method::ALL.into_iter().map(MethodId::Classical).collect()
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodId::Classical(m) => f.write_str(m.name()),
            MethodId::Learned(name) => write!(f, "learned:{name}"),
        }
    }
}

impl FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.strip_prefix("learned:") {
            Some(name) if !name.is_empty() => Ok(MethodId::Learned(name.to_owned())),
            Some(_) => Err("learned method needs a name".into()),
            None => s.parse().map(MethodId::Classical),
        }
    }
}

impl Serialize for MethodId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MethodId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub methods: Vec<MethodId>,
    pub mode: AccessMode,
    pub n: SampleSize,
    pub seed: u64,
    #[serde(default)]
    pub clamp: bool,
    #[serde(default)]
    pub empty: EmptyCells,
}

impl BenchmarkSpec {
    pub fn classical(mode: AccessMode, n: SampleSize, seed: u64) -> Self {
        Self {
            methods: MethodId::all_classical(),
            mode,
            n,
            seed,
            clamp: false,
            empty: EmptyCells::Keep,
        }
    }
}

/// A checkpoint available to the benchmark under `learned:<name>`.
#[derive(Debug, Clone)]
pub struct LearnedModel {
    pub name: String,
    pub checkpoint: Checkpoint,
}

/// A table with the exact NDV of each of its columns.
#[derive(Debug, Clone, Copy)]
pub struct EvalTable<'a> {
    pub table: &'a TableRecord,
    pub truths: &'a [u64],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRecord {
    pub table_id: String,
    pub column: String,
    pub method: MethodId,
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "D_hat", with = "ext_real::option")]
    pub d_hat: Option<f64>,
    #[serde(with = "ext_real::option")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_applicable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    #[serde(flatten)]
    pub aggregate: Option<Aggregate>,
    /// Columns the method could not estimate.
    pub not_applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub spec: BenchmarkSpec,
    pub per_method: BTreeMap<MethodId, MethodSummary>,
    pub records: Vec<ColumnRecord>,
}

impl BenchmarkReport {
    pub fn summary(&self, method: &MethodId) -> Option<&MethodSummary> {
        self.per_method.get(method)
    }

    /// Finite-or-infinite q-errors of one method, in record order.
    pub fn q_errors(&self, method: &MethodId) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| &r.method == method)
            .filter_map(|r| r.q)
            .collect()
    }
}

pub struct BenchmarkContext<'a> {
    pub learned: &'a [LearnedModel],
    pub provider: Option<&'a dyn EmbeddingProvider>,
    pub solver: SolverConfig,
    /// Worker threads; 1 runs inline.
    pub jobs: usize,
}

impl Default for BenchmarkContext<'_> {
    fn default() -> Self {
        Self {
            learned: &[],
            provider: None,
            solver: SolverConfig::default(),
            jobs: 1,
        }
    }
}

fn na_record(table: &EvalTable<'_>, column: usize, method: &MethodId, reason: String) -> ColumnRecord {
    ColumnRecord {
        table_id: table.table.table_id().to_owned(),
        column: table.table.schemas()[column].name.clone(),
        method: method.clone(),
        d: table.truths[column],
        d_hat: None,
        q: None,
        not_applicable: Some(reason),
    }
}

fn scored(table: &EvalTable<'_>, column: usize, method: &MethodId, value: f64) -> Result<ColumnRecord> {
    let d = table.truths[column];
    Ok(ColumnRecord {
        q: Some(q_error(value, d as f64)?),
        d_hat: Some(value),
        not_applicable: None,
        ..na_record(table, column, method, String::new())
    })
}

fn classical_records(
    table: &EvalTable<'_>,
    spec: &BenchmarkSpec,
    methods: &[Method],
    solver: &SolverConfig,
) -> Result<Vec<ColumnRecord>> {
    let mut out = Vec::new();
    if methods.is_empty() {
        return Ok(out);
    }
    for (i, column) in table.table.columns().iter().enumerate() {
        let seed = column_seed(spec.seed, table.table.table_id(), i);
        let sample = draw_sample(column, spec.mode, spec.n, seed).map_err(|e| EvalError::Data(e.to_string()))?;
        let profile = frequency_profile_with(&sample, spec.empty);
        let outcomes = estimate_all(&profile, solver);
        for &method in methods {
            let id = MethodId::Classical(method);
            let outcome = outcomes
                .iter()
                .find(|o| o.method() == method)
                .expect("registry covers every method");
            out.push(match outcome {
                EstimateOutcome::Estimated(e) => {
                    let e = if spec.clamp {
                        clamp_estimate(*e, profile.d(), profile.population())
                    } else {
                        *e
                    };
                    scored(table, i, &id, e.effective())?
                }
                EstimateOutcome::NotApplicable { reason, .. } => na_record(table, i, &id, reason.clone()),
            });
        }
    }
    Ok(out)
}

fn learned_records(
    table: &EvalTable<'_>,
    spec: &BenchmarkSpec,
    model: &LearnedModel,
    provider: Option<&dyn EmbeddingProvider>,
) -> Result<Vec<ColumnRecord>> {
    let id = MethodId::Learned(model.name.clone());
    let t = table.table.t();
    let all_na = |reason: String| (0..t).map(|i| na_record(table, i, &id, reason.clone())).collect();
    let Some(provider) = provider else {
        return Ok(all_na("no embedding provider".into()));
    };
    let population = table.table.row_count();
    if model.checkpoint.config.use_stats && spec.n.resolve(population) == 0 {
        return Ok(all_na("model needs a sample".into()));
    }
    let access = ProfileAccess {
        mode: spec.mode,
        size: spec.n,
        seed: spec.seed,
        empty: spec.empty,
    };
    let estimates = match predict(table.table, provider, &model.checkpoint, &access) {
        Ok(v) => v,
        Err(ModelError::Semantics(SemanticsError::Lookup(key))) => {
            return Ok(all_na(format!("missing embedding for {key:?}")))
        }
        Err(ModelError::MissingEmbeddings(keys)) => return Ok(all_na(format!("{} missing embeddings", keys.len()))),
        Err(e) => return Err(EvalError::Model(e.to_string())),
    };
    estimates
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let v = if spec.clamp {
                v.clamp(1.0, (population as f64).max(1.0))
            } else {
                v
            };
            scored(table, i, &id, v)
        })
        .collect()
}

fn table_records(table: &EvalTable<'_>, spec: &BenchmarkSpec, ctx: &BenchmarkContext<'_>) -> Result<Vec<ColumnRecord>> {
    if table.truths.len() != table.table.t() {
        return Err(EvalError::Data(format!(
            "{} ground-truth values for the {} columns of {}",
            table.truths.len(),
            table.table.t(),
            table.table.table_id()
        )));
    }
    let classical: Vec<Method> = spec
        .methods
        .iter()
        .filter_map(|m| match m {
            MethodId::Classical(m) => Some(*m),
            MethodId::Learned(_) => None,
        })
        .collect();
    let mut by_method: BTreeMap<MethodId, Vec<ColumnRecord>> = BTreeMap::new();
    for r in classical_records(table, spec, &classical, &ctx.solver)? {
        by_method.entry(r.method.clone()).or_default().push(r);
    }
    for m in &spec.methods {
        if let MethodId::Learned(name) = m {
            let model = ctx.learned.iter().find(|l| &l.name == name);
            let records = match model {
                Some(model) => learned_records(table, spec, model, ctx.provider)?,
                None => (0..table.table.t())
                    .map(|i| na_record(table, i, m, format!("no checkpoint named {name:?}")))
                    .collect(),
            };
            by_method.insert(m.clone(), records);
        }
    }
    let mut out = Vec::new();
    for column in 0..table.table.t() {
        for m in &spec.methods {
            out.push(by_method[m][column].clone());
        }
    }
    Ok(out)
}

/// Samples, estimates and scores every column with every method.
/// Records are ordered by table, column, then method as listed in the spec.
pub fn run_benchmark(
    tables: &[EvalTable<'_>],
    spec: &BenchmarkSpec,
    ctx: &BenchmarkContext<'_>,
) -> Result<BenchmarkReport> {
    spec.n.validate().map_err(|e| EvalError::Data(e.to_string()))?;
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = spec.methods.iter().find(|m| !seen.insert((*m).clone())) {
        return Err(EvalError::Data(format!("method {dup} listed twice")));
    }
    let per_table: Vec<Vec<ColumnRecord>> = if ctx.jobs <= 1 {
        tables
            .iter()
            .map(|t| table_records(t, spec, ctx))
            .collect::<Result<_>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.jobs)
            .build()
            .map_err(|e| EvalError::Data(e.to_string()))?
            .install(|| {
                tables
                    .par_iter()
                    .map(|t| table_records(t, spec, ctx))
                    .collect::<Result<_>>()
            })?
    };
    let records: Vec<ColumnRecord> = per_table.into_iter().flatten().collect();
    let mut per_method = BTreeMap::new();
    for m in &spec.methods {
        let mine: Vec<&ColumnRecord> = records.iter().filter(|r| &r.method == m).collect();
        let q: Vec<f64> = mine.iter().filter_map(|r| r.q).collect();
        per_method.insert(
            m.clone(),
            MethodSummary {
                aggregate: if q.is_empty() {
                    None
                } else {
                    Some(Aggregate::from_q_errors(&q)?)
                },
                not_applicable: mine.len() - q.len(),
            },
        );
    }
    Ok(BenchmarkReport {
        spec: spec.clone(),
        per_method,
        records,
    })
}
