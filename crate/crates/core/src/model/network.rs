use std::cmp::Ordering;

use ndarray::{s, Array1, Array2};
use rand_chacha::ChaCha8Rng;

use super::attention::{self, LayerCache};
use super::mlp::{self, MlpCache};
use super::{Ablation, ModelConfig, ModelError, ModelParams, Result};

/// Per-column inputs besides the embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnFeatures {
    /// Table row count `N`.
    pub population: u64,
    /// Raw cut-off profile `f_1..f_K`; empty in no-data mode.
    pub profile: Vec<f64>,
}

/// One table ready for the network: a `t x l` embedding matrix and the
/// per-column features in the same row order.
#[derive(Debug, Clone, PartialEq)]
pub struct TableInput {
    pub x: Array2<f64>,
    pub columns: Vec<ColumnFeatures>,
}

impl TableInput {
    pub fn t(&self) -> usize {
        self.columns.len()
    }

    fn check(&self, config: &ModelConfig) -> Result<()> {
        let (t, l) = self.x.dim();
        if t == 0 || t != self.columns.len() {
            return Err(ModelError::Shape(format!(
                "{t} embedding rows for {} columns",
                self.columns.len()
            )));
        }
        if l != config.l {
            return Err(ModelError::Shape(format!(
                "embedding width {l}, model expects {}",
                config.l
            )));
        }
        for c in &self.columns {
            if c.population == 0 {
                return Err(ModelError::Shape("row count N must be at least 1".into()));
            }
            if c.profile.len() != config.profile_len() {
                return Err(ModelError::Shape(format!(
                    "profile length {}, model expects {}",
                    c.profile.len(),
                    config.profile_len()
                )));
            }
        }
        Ok(())
    }

    /// Column order sorted by content, so every reduction over columns runs
    /// in the same order no matter how the table was laid out.
    fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.t()).collect();
        order.sort_by(|&i, &j| {
            let (xi, xj) = (self.x.row(i), self.x.row(j));
            cmp_iter(xi.iter(), xj.iter())
                .then(self.columns[i].population.cmp(&self.columns[j].population))
                .then_with(|| cmp_iter(self.columns[i].profile.iter(), self.columns[j].profile.iter()))
        });
        order
    }
}

fn cmp_iter<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> Ordering {
    a.zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

pub(crate) fn check_params(params: &ModelParams, config: &ModelConfig) -> Result<()> {
    if params.attention.len() != config.attention_layers() {
        return Err(ModelError::Shape(format!(
            "{} attention layers, config expects {}",
            params.attention.len(),
            config.attention_layers()
        )));
    }
    if let Some(a) = params.attention.first() {
        if a.wq.dim() != (config.l, config.l) {
            return Err(ModelError::Shape(format!(
                "attention width {:?}, config l={}",
                a.wq.dim(),
                config.l
            )));
        }
    }
    match params.mlp.first() {
        Some(d) if d.w.nrows() == config.feature_len() => Ok(()),
        Some(d) => Err(ModelError::Shape(format!(
            "MLP input {} but features have length {}",
            d.w.nrows(),
            config.feature_len()
        ))),
        None => Err(ModelError::Shape("empty MLP".into())),
    }
}

fn interact(
    params: &ModelParams,
    config: &ModelConfig,
    x: &Array2<f64>,
    mut dropout: Option<&mut ChaCha8Rng>,
) -> (Array2<f64>, Vec<LayerCache>) {
    let mut h = x.clone();
    let mut caches = Vec::with_capacity(params.attention.len());
    for layer in &params.attention {
        let d = dropout
            .as_deref_mut()
            .filter(|_| config.attention_dropout > 0.0)
            .map(|rng| (config.attention_dropout, rng));
        let (out, cache) = attention::layer_forward(layer, &h, config.heads, d);
        caches.push(cache);
        h = out;
    }
    (h, caches)
}

/// Multi-head self-attention over the columns of a table (`t x l` in and out).
pub fn column_interaction(x: &Array2<f64>, params: &ModelParams, config: &ModelConfig) -> Result<Array2<f64>> {
    config.validate()?;
    if !config.ablation.uses_attention() {
        return Err(ModelError::Config(format!(
            "{} has no column interaction",
            config.ablation
        )));
    }
    check_params(params, config)?;
    if x.nrows() == 0 || x.ncols() != config.l {
        return Err(ModelError::Shape(format!(
            "input {:?}, expected t x {}",
            x.dim(),
            config.l
        )));
    }
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.sort_by(|&i, &j| cmp_iter(x.row(i).iter(), x.row(j).iter()));
    let xc = x.select(ndarray::Axis(0), &order);
    let (yc, _) = interact(params, config, &xc, None);
    let mut y = Array2::zeros(x.dim());
    for (c, &orig) in order.iter().enumerate() {
        y.row_mut(orig).assign(&yc.row(c));
    }
    Ok(y)
}

fn transform_profile<'a>(profile: &'a [f64], config: &ModelConfig) -> impl Iterator<Item = f64> + use<'a> {
    let log1p = config.profile_log1p;
    profile.iter().map(move |&f| if log1p { f.ln_1p() } else { f })
}

fn fill_features(
    row: &mut ndarray::ArrayViewMut1<'_, f64>,
    x: ndarray::ArrayView1<'_, f64>,
    x_prime: Option<ndarray::ArrayView1<'_, f64>>,
    column: &ColumnFeatures,
    config: &ModelConfig,
) {
    let l = config.semantic_len();
    match config.ablation {
        Ablation::WoTabAndCol => {}
        Ablation::WoTab => row.slice_mut(s![..l]).assign(&x),
        Ablation::WoCol => row.slice_mut(s![..l]).assign(&x_prime.unwrap()),
        _ => row.slice_mut(s![..l]).assign(&(&x + &x_prime.unwrap())),
    }
    row[l] = (column.population as f64).ln();
    for (slot, v) in row
        .slice_mut(s![l + 1..])
        .iter_mut()
        .zip(transform_profile(&column.profile, config))
    {
        *slot = v;
    }
}

/// Feature vector of one column: semantic block, `ln N`, then the profile
/// when the model uses statistics.
pub fn assemble_features(
    x: &[f64],
    x_prime: &[f64],
    population: u64,
    profile: &[f64],
    config: &ModelConfig,
) -> Result<Vec<f64>> {
    if population == 0 {
        return Err(ModelError::Shape("row count N must be at least 1".into()));
    }
    if x.len() != config.l || x_prime.len() != config.l {
        return Err(ModelError::Shape(format!(
            "embedding lengths {} and {}, expected {}",
            x.len(),
            x_prime.len(),
            config.l
        )));
    }
    if profile.len() != config.profile_len() {
        return Err(ModelError::Shape(format!(
            "profile length {}, expected {}",
            profile.len(),
            config.profile_len()
        )));
    }
    let mut out = Array1::zeros(config.feature_len());
    let column = ColumnFeatures {
        population,
        profile: profile.to_vec(),
    };
    fill_features(
        &mut out.view_mut(),
        ndarray::ArrayView1::from(x),
        Some(ndarray::ArrayView1::from(x_prime)),
        &column,
        config,
    );
    Ok(out.to_vec())
}

/// MLP output `ln D` for one assembled feature vector.
pub fn forward(features: &[f64], params: &ModelParams, config: &ModelConfig) -> Result<f64> {
    check_params(params, config)?;
    if features.len() != config.feature_len() {
        return Err(ModelError::Shape(format!(
            "feature length {}, expected {}",
            features.len(),
            config.feature_len()
        )));
    }
    let z = Array2::from_shape_vec((1, features.len()), features.to_vec()).unwrap();
    let (out, _) = mlp::forward(&params.mlp, z);
    let v = out[0];
    if !v.is_finite() {
        return Err(ModelError::NonFinite("network output".into()));
    }
    Ok(v)
}

/// Mean squared log error between estimates and truths.
pub fn loss(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(ModelError::Shape(format!(
            "{} estimates for {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    let mut total = 0.0;
    for (&e, &d) in estimates.iter().zip(truths) {
        if !(d >= 1.0) {
            return Err(ModelError::Truth(format!("D = {d} is below 1")));
        }
        if !(e > 0.0) {
            return Err(ModelError::Truth(format!("estimate {e} is not positive")));
        }
        total += (e.ln() - d.ln()).powi(2);
    }
    Ok(total / estimates.len() as f64)
}

/// Everything the backward pass needs for one table.
pub(crate) struct Trace {
    order: Vec<usize>,
    attention: Vec<LayerCache>,
    mlp: MlpCache,
    /// `ln D` per column, original order.
    pub(crate) outputs: Vec<f64>,
}

pub(crate) fn forward_trace(
    params: &ModelParams,
    config: &ModelConfig,
    input: &TableInput,
    dropout: Option<&mut ChaCha8Rng>,
) -> Result<Trace> {
    input.check(config)?;
    let order = input.canonical_order();
    let xc = input.x.select(ndarray::Axis(0), &order);
    let (x_prime, caches) = if config.ablation.uses_attention() {
        let (y, c) = interact(params, config, &xc, dropout);
        (Some(y), c)
    } else {
        (None, Vec::new())
    };
    let mut z = Array2::zeros((order.len(), config.feature_len()));
    for (c, &orig) in order.iter().enumerate() {
        fill_features(
            &mut z.row_mut(c),
            xc.row(c),
            x_prime.as_ref().map(|y| y.row(c)),
            &input.columns[orig],
            config,
        );
    }
    let (out_c, mlp_cache) = mlp::forward(&params.mlp, z);
    let mut outputs = vec![0.0; order.len()];
    for (c, &orig) in order.iter().enumerate() {
        outputs[orig] = out_c[c];
    }
    if outputs.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite("network output".into()));
    }
    Ok(Trace {
        order,
        attention: caches,
        mlp: mlp_cache,
        outputs,
    })
}

/// Adds the gradients for one traced table; `d_out` is in original order.
pub(crate) fn backward_trace(
    params: &ModelParams,
    config: &ModelConfig,
    trace: &Trace,
    d_out: &[f64],
    grads: &mut ModelParams,
) {
    let dc = Array1::from_iter(trace.order.iter().map(|&orig| d_out[orig]));
    let dz = mlp::backward(&params.mlp, &trace.mlp, &dc, &mut grads.mlp);
    if !config.ablation.uses_attention() {
        return;
    }
    let mut delta = dz.slice(s![.., ..config.l]).to_owned();
    for i in (0..params.attention.len()).rev() {
        let d_in = attention::layer_backward(
            &params.attention[i],
            &trace.attention[i],
            &delta,
            config.heads,
            &mut grads.attention[i],
            i > 0,
        );
        if let Some(d) = d_in {
            delta = d;
        }
    }
}

/// `ln D` for every column of a table, in column order.
pub fn predict_log(params: &ModelParams, config: &ModelConfig, input: &TableInput) -> Result<Vec<f64>> {
    check_params(params, config)?;
    Ok(forward_trace(params, config, input, None)?.outputs)
}

/// ReLU gate of every hidden unit for every column, in canonical column order.
/// Finite-difference checks use it to skip steps that cross a kink.
pub fn activation_pattern(params: &ModelParams, config: &ModelConfig, input: &TableInput) -> Result<Vec<bool>> {
    check_params(params, config)?;
    Ok(forward_trace(params, config, input, None)?.mlp.pattern())
}

/// Loss over all columns of a batch of tables and its gradient.
/// `truths[i]` holds the true `D` of each column of `tables[i]`.
pub fn loss_and_gradients(
    params: &ModelParams,
    config: &ModelConfig,
    tables: &[&TableInput],
    truths: &[&[f64]],
    mut dropout: Option<&mut ChaCha8Rng>,
) -> Result<(f64, ModelParams)> {
    check_params(params, config)?;
    let m: usize = tables.iter().map(|t| t.t()).sum();
    if m == 0 || tables.len() != truths.len() {
        return Err(ModelError::Shape("empty or mismatched batch".into()));
    }
    let mut grads = params.zeros_like();
    let mut total = 0.0;
    for (table, truth) in tables.iter().zip(truths) {
        if truth.len() != table.t() {
            return Err(ModelError::Shape(format!(
                "{} truths for {} columns",
                truth.len(),
                table.t()
            )));
        }
        let trace = forward_trace(params, config, table, dropout.as_deref_mut())?;
        let mut d_out = Vec::with_capacity(truth.len());
        for (&pred, &d) in trace.outputs.iter().zip(truth.iter()) {
            if !(d >= 1.0) {
                return Err(ModelError::Truth(format!("D = {d} is below 1")));
            }
            let r = pred - d.ln();
            total += r * r;
            d_out.push(2.0 * r / m as f64);
        }
        backward_trace(params, config, &trace, &d_out, &mut grads);
    }
    Ok((total / m as f64, grads))
}
