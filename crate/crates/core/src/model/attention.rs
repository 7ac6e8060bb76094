use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::AttentionLayer;

pub(crate) const LN_EPS: f64 = 1e-5;

/// Row-wise softmax with max subtraction.
pub(crate) fn softmax_rows(mut s: Array2<f64>) -> Array2<f64> {
    for mut row in s.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    s
}

struct LayerNormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

pub(crate) struct LayerCache {
    input: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Softmax output per head.
    probs: Vec<Array2<f64>>,
    /// Inverted-dropout multipliers per head (0 or 1/(1-p)).
    masks: Option<Vec<Array2<f64>>>,
    concat: Array2<f64>,
    ln: Option<LayerNormCache>,
}

/// One multi-head self-attention layer over the `t x l` rows of `x`.
///
/// Heads have width `l / heads` and scores are scaled by `1/sqrt(l/heads)`.
/// `dropout` is `(p, rng)` during training.
pub(crate) fn layer_forward(
    layer: &AttentionLayer,
    x: &Array2<f64>,
    heads: usize,
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> (Array2<f64>, LayerCache) {
    let (t, l) = x.dim();
    let dh = l / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = x.dot(&layer.wq) + &layer.bq;
    let k = x.dot(&layer.wk) + &layer.bk;
    let v = x.dot(&layer.wv) + &layer.bv;
    let mut concat = Array2::zeros((t, l));
    let mut probs = Vec::with_capacity(heads);
    let mut masks = dropout.as_ref().map(|_| Vec::with_capacity(heads));
    let mut dropout = dropout;
    for h in 0..heads {
        let cols = s![.., h * dh..(h + 1) * dh];
        let scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
        let p = softmax_rows(scores);
        let used = match dropout.as_mut() {
            Some((rate, rng)) if *rate > 0.0 => {
                let keep = 1.0 / (1.0 - *rate);
                let mask = Array2::from_shape_fn((t, t), |_| if rng.random::<f64>() < *rate { 0.0 } else { keep });
                let used = &p * &mask;
                masks.as_mut().unwrap().push(mask);
                used
            }
            Some(_) => {
                masks.as_mut().unwrap().push(Array2::ones((t, t)));
                p.clone()
            }
            None => p.clone(),
        };
        concat.slice_mut(cols).assign(&used.dot(&v.slice(cols)));
        probs.push(p);
    }
    let y = concat.dot(&layer.wo) + &layer.bo;
    let (out, ln) = match (&layer.ln_gain, &layer.ln_bias) {
        (Some(gain), Some(bias)) => {
            let (xhat, inv_std) = normalize_rows(&y);
            (&xhat * gain + bias, Some(LayerNormCache { xhat, inv_std }))
        }
        _ => (y, None),
    };
    let cache = LayerCache {
        input: x.clone(),
        q,
        k,
        v,
        probs,
        masks,
        concat,
        ln,
    };
    (out, cache)
}

fn normalize_rows(y: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let l = y.ncols() as f64;
    let mut xhat = y.clone();
    let mut inv = Array1::zeros(y.nrows());
    for (i, mut row) in xhat.rows_mut().into_iter().enumerate() {
        let mean = row.sum() / l;
        row.mapv_inplace(|v| v - mean);
        let var = row.iter().map(|v| v * v).sum::<f64>() / l;
        let inv_std = 1.0 / (var + LN_EPS).sqrt();
        row.mapv_inplace(|v| v * inv_std);
        inv[i] = inv_std;
    }
    (xhat, inv)
}

/// Accumulates parameter gradients into `grads` and returns `dL/dx` when
/// `need_input_grad` is set.
pub(crate) fn layer_backward(
    layer: &AttentionLayer,
    cache: &LayerCache,
    d_out: &Array2<f64>,
    heads: usize,
    grads: &mut AttentionLayer,
    need_input_grad: bool,
) -> Option<Array2<f64>> {
    let (t, l) = cache.input.dim();
    let dh = l / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let dy = match (&cache.ln, &layer.ln_gain) {
        (Some(ln), Some(gain)) => {
            *grads.ln_gain.as_mut().unwrap() += &(d_out * &ln.xhat).sum_axis(Axis(0));
            *grads.ln_bias.as_mut().unwrap() += &d_out.sum_axis(Axis(0));
            let dxhat = d_out * gain;
            let lf = l as f64;
            let mut dy = Array2::zeros((t, l));
            for i in 0..t {
                let g = dxhat.row(i);
                let xh = ln.xhat.row(i);
                let mean_g = g.sum() / lf;
                let mean_gx = g.dot(&xh) / lf;
                let row = (&g - mean_g - &(&xh * mean_gx)) * ln.inv_std[i];
                dy.row_mut(i).assign(&row);
            }
            dy
        }
        _ => d_out.clone(),
    };
    grads.wo += &cache.concat.t().dot(&dy);
    grads.bo += &dy.sum_axis(Axis(0));
    let d_concat = dy.dot(&layer.wo.t());
    let mut dq = Array2::zeros((t, l));
    let mut dk = Array2::zeros((t, l));
    let mut dv = Array2::zeros((t, l));
    for h in 0..heads {
        let cols = s![.., h * dh..(h + 1) * dh];
        let p = &cache.probs[h];
        let d_head = d_concat.slice(cols);
        let (used, mask) = match &cache.masks {
            Some(m) => (p * &m[h], Some(&m[h])),
            None => (p.clone(), None),
        };
        dv.slice_mut(cols).assign(&used.t().dot(&d_head));
        let mut dp = d_head.dot(&cache.v.slice(cols).t());
        if let Some(mask) = mask {
            dp *= mask;
        }
        // Softmax Jacobian per row: ds = p * (dp - <dp, p>).
        let mut ds = Array2::zeros((t, t));
        for i in 0..t {
            let pr = p.row(i);
            let dpr = dp.row(i);
            let inner = pr.dot(&dpr);
            ds.row_mut(i).assign(&(&pr * &(&dpr - inner)));
        }
        ds *= scale;
        dq.slice_mut(cols).assign(&ds.dot(&cache.k.slice(cols)));
        dk.slice_mut(cols).assign(&ds.t().dot(&cache.q.slice(cols)));
    }
    let x = &cache.input;
    grads.wq += &x.t().dot(&dq);
    grads.bq += &dq.sum_axis(Axis(0));
    grads.wk += &x.t().dot(&dk);
    grads.bk += &dk.sum_axis(Axis(0));
    grads.wv += &x.t().dot(&dv);
    grads.bv += &dv.sum_axis(Axis(0));
    need_input_grad.then(|| dq.dot(&layer.wq.t()) + dk.dot(&layer.wk.t()) + dv.dot(&layer.wv.t()))
}
