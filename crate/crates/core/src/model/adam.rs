use serde::{Deserialize, Serialize};

use super::{ModelError, ModelParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected moments.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    m: ModelParams,
    v: ModelParams,
    step: i32,
}

impl Adam {
    pub fn new(params: &ModelParams, config: AdamConfig) -> Result<Self> {
        if !(config.learning_rate > 0.0) {
            return Err(ModelError::Config("learning rate must be positive".into()));
        }
        Ok(Self {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        })
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    /// One update. Fails, leaving parameters and moments untouched, if the
    /// result would contain a non-finite value.
    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) -> Result<()> {
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let t = self.step + 1;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let mut next = params.clone();
        let (mut m_next, mut v_next) = (self.m.clone(), self.v.clone());
        let g = grads.blocks();
        let m = m_next.blocks_mut();
        let v = v_next.blocks_mut();
        let p = next.blocks_mut();
        for ((((name, p), (_, m)), (_, v)), (_, g)) in p.into_iter().zip(m).zip(v).zip(g) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                if !p[i].is_finite() {
                    return Err(ModelError::NonFinite(format!("{name} after update {t}")));
                }
            }
        }
        *params = next;
        self.m = m_next;
        self.v = v_next;
        self.step = t;
        Ok(())
    }
}
