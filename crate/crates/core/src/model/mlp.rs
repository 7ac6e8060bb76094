use ndarray::{Array1, Array2, Axis};

use super::params::Dense;

pub(crate) struct MlpCache {
    /// Input to each layer; entry 0 is the feature matrix.
    inputs: Vec<Array2<f64>>,
    /// ReLU gates of the hidden layers.
    active: Vec<Array2<bool>>,
}

impl MlpCache {
    /// Activation pattern of the hidden units, for finite-difference checks.
    pub(crate) fn pattern(&self) -> Vec<bool> {
        self.active.iter().flat_map(|a| a.iter().copied()).collect()
    }
}

/// Rectifier hidden layers then a linear scalar head, one row per column.
pub(crate) fn forward(layers: &[Dense], z: Array2<f64>) -> (Array1<f64>, MlpCache) {
    let last = layers.len() - 1;
    let mut inputs = Vec::with_capacity(layers.len());
    let mut active = Vec::with_capacity(last);
    let mut h = z;
    for (i, layer) in layers.iter().enumerate() {
        let pre = h.dot(&layer.w) + &layer.b;
        inputs.push(h);
        if i == last {
            h = pre;
        } else {
            active.push(pre.mapv(|v| v > 0.0));
            h = pre.mapv(|v| v.max(0.0));
        }
    }
    (h.remove_axis(Axis(1)), MlpCache { inputs, active })
}

/// Accumulates gradients given `dL/doutput` and returns `dL/dfeatures`.
pub(crate) fn backward(layers: &[Dense], cache: &MlpCache, d_out: &Array1<f64>, grads: &mut [Dense]) -> Array2<f64> {
    let mut delta = d_out.clone().insert_axis(Axis(1));
    for i in (0..layers.len()).rev() {
        grads[i].w += &cache.inputs[i].t().dot(&delta);
        grads[i].b += &delta.sum_axis(Axis(0));
        let mut d_in = delta.dot(&layers[i].w.t());
        if i > 0 {
            d_in.zip_mut_with(&cache.active[i - 1], |d, &on| {
                if !on {
                    *d = 0.0;
                }
            });
        }
        delta = d_in;
    }
    delta
}
