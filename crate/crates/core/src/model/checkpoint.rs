use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::network::check_params;
use super::params::{AttentionLayer, Dense};
use super::{ModelConfig, ModelError, ModelParams, Result, TrainConfig};
use crate::ext_real;

pub const CHECKPOINT_FORMAT: &str = "ndv-model-v1";

/// A trained model with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub train: TrainConfig,
    pub seed: u64,
    /// Epoch the parameters were taken from (0 = untrained).
    pub epoch: usize,
    pub validation_p90: f64,
    pub params: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    wq: Vec<Vec<f64>>,
    bq: Vec<f64>,
    wk: Vec<Vec<f64>>,
    bk: Vec<f64>,
    wv: Vec<Vec<f64>>,
    bv: Vec<f64>,
    wo: Vec<Vec<f64>>,
    bo: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ln_gain: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ln_bias: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DenseJson {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsJson {
    attention: Vec<LayerJson>,
    mlp: Vec<DenseJson>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointJson {
    format: String,
    config: ModelConfig,
    train: TrainConfig,
    seed: u64,
    epoch: usize,
    #[serde(with = "ext_real")]
    validation_p90: f64,
    params: ParamsJson,
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(name: &str, rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ModelError::Checkpoint(format!("{name} has ragged rows")));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, cols), rows.into_iter().flatten().collect())
        .map_err(|e| ModelError::Checkpoint(format!("{name}: {e}")))
}

impl From<&ModelParams> for ParamsJson {
    fn from(p: &ModelParams) -> Self {
        ParamsJson {
            attention: p
                .attention
                .iter()
                .map(|a| LayerJson {
                    wq: rows(&a.wq),
                    bq: a.bq.to_vec(),
                    wk: rows(&a.wk),
                    bk: a.bk.to_vec(),
                    wv: rows(&a.wv),
                    bv: a.bv.to_vec(),
                    wo: rows(&a.wo),
                    bo: a.bo.to_vec(),
                    ln_gain: a.ln_gain.as_ref().map(|g| g.to_vec()),
                    ln_bias: a.ln_bias.as_ref().map(|b| b.to_vec()),
                })
                .collect(),
            mlp: p
                .mlp
                .iter()
                .map(|d| DenseJson {
                    w: rows(&d.w),
                    b: d.b.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ParamsJson> for ModelParams {
    type Error = ModelError;

    fn try_from(p: ParamsJson) -> Result<Self> {
        let attention = p
            .attention
            .into_iter()
            .map(|a| {
                Ok(AttentionLayer {
                    wq: matrix("wq", a.wq)?,
                    bq: Array1::from(a.bq),
                    wk: matrix("wk", a.wk)?,
                    bk: Array1::from(a.bk),
                    wv: matrix("wv", a.wv)?,
                    bv: Array1::from(a.bv),
                    wo: matrix("wo", a.wo)?,
                    bo: Array1::from(a.bo),
                    ln_gain: a.ln_gain.map(Array1::from),
                    ln_bias: a.ln_bias.map(Array1::from),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mlp = p
            .mlp
            .into_iter()
            .map(|d| {
                Ok(Dense {
                    w: matrix("mlp.w", d.w)?,
                    b: Array1::from(d.b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelParams { attention, mlp })
    }
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        let json = CheckpointJson {
            format: CHECKPOINT_FORMAT.into(),
            config: self.config.clone(),
            train: self.train.clone(),
            seed: self.seed,
            epoch: self.epoch,
            validation_p90: self.validation_p90,
            params: (&self.params).into(),
        };
        serde_json::to_string(&json).map_err(|e| ModelError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: CheckpointJson = serde_json::from_str(text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        if json.format != CHECKPOINT_FORMAT {
            return Err(ModelError::Checkpoint(format!("unsupported format {:?}", json.format)));
        }
        json.config.validate()?;
        let params = ModelParams::try_from(json.params)?;
        check_params(&params, &json.config)?;
        if !params.all_finite() {
            return Err(ModelError::NonFinite("checkpoint parameters".into()));
        }
        Ok(Self {
            config: json.config,
            train: json.train,
            seed: json.seed,
            epoch: json.epoch,
            validation_p90: json.validation_p90,
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let mut out = BufWriter::new(File::create(&tmp)?);
        out.write_all(self.to_json()?.as_bytes())?;
        out.flush()?;
        drop(out);
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        std::io::Read::read_to_string(&mut BufReader::new(File::open(path)?), &mut text)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Ablation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_round_trip_is_bit_exact() {
        for (ablation, layer_norm) in [
            (Ablation::Full, false),
            (Ablation::Full, true),
            (Ablation::WoTabAndCol, false),
        ] {
            let config = ModelConfig {
                l: 4,
                heads: 2,
                k: 3,
                hidden: vec![5],
                ablation,
                layer_norm,
                ..ModelConfig::default()
            };
            let ck = Checkpoint {
                params: ModelParams::init(&config, &mut ChaCha8Rng::seed_from_u64(11)),
                config,
                train: TrainConfig::default(),
                seed: 11,
                epoch: 3,
                validation_p90: f64::INFINITY,
            };
            let text = ck.to_json().unwrap();
            let back = Checkpoint::from_json(&text).unwrap();
            assert_eq!(back, ck);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn rejects_shape_mismatch() {
        let config = ModelConfig {
            l: 4,
            heads: 2,
            k: 3,
            hidden: vec![5],
            ..ModelConfig::default()
        };
        let ck = Checkpoint {
            params: ModelParams::init(&config, &mut ChaCha8Rng::seed_from_u64(1)),
            config,
            train: TrainConfig::default(),
            seed: 1,
            epoch: 0,
            validation_p90: 1.0,
        };
        let text = ck.to_json().unwrap().replace("\"k\":3", "\"k\":4");
        assert!(Checkpoint::from_json(&text).is_err());
    }
}
