use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ModelConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionLayer {
    pub wq: Array2<f64>,
    pub bq: Array1<f64>,
    pub wk: Array2<f64>,
    pub bk: Array1<f64>,
    pub wv: Array2<f64>,
    pub bv: Array1<f64>,
    /// Output projection applied to the concatenated heads.
    pub wo: Array2<f64>,
    pub bo: Array1<f64>,
    /// Layer-norm gain and shift, present only when the config enables it.
    pub ln_gain: Option<Array1<f64>>,
    pub ln_bias: Option<Array1<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `fan_in x fan_out`, applied as `z W + b`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub attention: Vec<AttentionLayer>,
    /// Hidden layers followed by the scalar output head.
    pub mlp: Vec<Dense>,
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..=bound))
}

fn uniform1(rng: &mut ChaCha8Rng, len: usize, bound: f64) -> Array1<f64> {
    Array1::from_shape_fn(len, |_| rng.random_range(-bound..=bound))
}

impl ModelParams {
    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for every weight and bias.
    pub fn init(config: &ModelConfig, rng: &mut ChaCha8Rng) -> Self {
        let l = config.l;
        let bound = 1.0 / (l as f64).sqrt();
        let attention = (0..config.attention_layers())
            .map(|_| AttentionLayer {
                wq: uniform(rng, l, l, bound),
                bq: uniform1(rng, l, bound),
                wk: uniform(rng, l, l, bound),
                bk: uniform1(rng, l, bound),
                wv: uniform(rng, l, l, bound),
                bv: uniform1(rng, l, bound),
                wo: uniform(rng, l, l, bound),
                bo: uniform1(rng, l, bound),
                ln_gain: config.layer_norm.then(|| Array1::ones(l)),
                ln_bias: config.layer_norm.then(|| Array1::zeros(l)),
            })
            .collect();
        let mut sizes = vec![config.feature_len()];
        sizes.extend(&config.hidden);
        sizes.push(1);
        let mlp = sizes
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                Dense {
                    w: uniform(rng, w[0], w[1], bound),
                    b: uniform1(rng, w[1], bound),
                }
            })
            .collect();
        Self { attention, mlp }
    }

    /// Same shapes, all zeros (gradient accumulator, Adam moments).
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, block) in z.blocks_mut() {
            block.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    /// Every parameter block in a fixed order with a stable name.
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        for (i, a) in self.attention.iter().enumerate() {
            let named = [
                ("wq", Some(&a.wq as &dyn Block)),
                ("bq", Some(&a.bq as &dyn Block)),
                ("wk", Some(&a.wk as &dyn Block)),
                ("bk", Some(&a.bk as &dyn Block)),
                ("wv", Some(&a.wv as &dyn Block)),
                ("bv", Some(&a.bv as &dyn Block)),
                ("wo", Some(&a.wo as &dyn Block)),
                ("bo", Some(&a.bo as &dyn Block)),
                ("ln_gain", a.ln_gain.as_ref().map(|g| g as &dyn Block)),
                ("ln_bias", a.ln_bias.as_ref().map(|b| b as &dyn Block)),
            ];
            for (name, block) in named {
                if let Some(block) = block {
                    out.push((format!("attention[{i}].{name}"), block.slice()));
                }
            }
        }
        for (i, d) in self.mlp.iter().enumerate() {
            out.push((format!("mlp[{i}].w"), d.w.slice()));
            out.push((format!("mlp[{i}].b"), d.b.slice()));
        }
        out
    }

    /// Mutable counterpart of [`Self::blocks`], same order.
    pub fn blocks_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (i, a) in self.attention.iter_mut().enumerate() {
            let named: [(&str, Option<&mut dyn Block>); 10] = [
                ("wq", Some(&mut a.wq)),
                ("bq", Some(&mut a.bq)),
                ("wk", Some(&mut a.wk)),
                ("bk", Some(&mut a.bk)),
                ("wv", Some(&mut a.wv)),
                ("bv", Some(&mut a.bv)),
                ("wo", Some(&mut a.wo)),
                ("bo", Some(&mut a.bo)),
                ("ln_gain", a.ln_gain.as_mut().map(|g| g as &mut dyn Block)),
                ("ln_bias", a.ln_bias.as_mut().map(|b| b as &mut dyn Block)),
            ];
            for (name, block) in named {
                if let Some(block) = block {
                    out.push((format!("attention[{i}].{name}"), block.slice_mut()));
                }
            }
        }
        for (i, d) in self.mlp.iter_mut().enumerate() {
            out.push((format!("mlp[{i}].w"), d.w.slice_mut()));
            out.push((format!("mlp[{i}].b"), d.b.slice_mut()));
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.blocks().iter().all(|(_, b)| b.iter().all(|v| v.is_finite()))
    }

    /// `self += scale * other`, block by block.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        let src = other.blocks();
        let dst = self.blocks_mut();
        assert_eq!(dst.len(), src.len(), "parameter shapes differ");
        for ((_, dst), (_, s)) in dst.into_iter().zip(src) {
            assert_eq!(dst.len(), s.len(), "parameter shapes differ");
            dst.iter_mut().zip(s).for_each(|(d, s)| *d += scale * s);
        }
    }
}

trait Block {
    fn slice(&self) -> &[f64];
    fn slice_mut(&mut self) -> &mut [f64];
}

impl<D: ndarray::Dimension> Block for ndarray::Array<f64, D> {
    fn slice(&self) -> &[f64] {
        self.as_slice().expect("parameters are stored in standard layout")
    }
    fn slice_mut(&mut self) -> &mut [f64] {
        self.as_slice_mut().expect("parameters are stored in standard layout")
    }
}
