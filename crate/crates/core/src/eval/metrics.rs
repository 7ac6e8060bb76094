use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{EvalError, Result};
use crate::ext_real;

/// `max(D̂/D, D/D̂)`; `+∞` for a non-positive or non-finite estimate.
pub fn q_error(estimate: f64, truth: f64) -> Result<f64> {
    if !(truth >= 1.0) || !truth.is_finite() {
        return Err(EvalError::Truth(truth));
    }
    if !(estimate > 0.0) || !estimate.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok((estimate / truth).max(truth / estimate))
}

fn ascending(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(v) = values.iter().find(|v| v.is_nan()) {
        return Err(EvalError::Value(*v));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(sorted)
}

fn rank(p: f64, m: usize) -> Result<usize> {
    if !(p > 0.0 && p <= 100.0) {
        return Err(EvalError::Percentile(p));
    }
    let r = (p / 100.0 * m as f64).ceil() as usize;
    Ok(r.clamp(1, m))
}

/// Nearest-rank percentile: the `⌈p/100·m⌉`-th smallest value.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    let r = rank(p, values.len().max(1))?;
    Ok(ascending(values)?[r - 1])
}

/// Summary statistics of the q-errors of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(with = "ext_real")]
    pub mean: f64,
    #[serde(with = "ext_real")]
    pub p50: f64,
    #[serde(with = "ext_real")]
    pub p75: f64,
    #[serde(with = "ext_real")]
    pub p90: f64,
    #[serde(with = "ext_real")]
    pub p95: f64,
    #[serde(with = "ext_real")]
    pub p99: f64,
    pub count: usize,
    pub inf_count: usize,
    /// Diagnostic only: mean of the values between the 5th and 95th
    /// nearest-rank positions.
    #[serde(with = "ext_real")]
    pub trimmed_mean: f64,
}

impl Aggregate {
    pub fn from_q_errors(values: &[f64]) -> Result<Self> {
        let sorted = ascending(values)?;
        let m = sorted.len();
        let at = |p: f64| rank(p, m).map(|r| sorted[r - 1]);
        let inf_count = sorted.iter().filter(|v| v.is_infinite()).count();
        let mean = if inf_count > 0 {
            f64::INFINITY
        } else {
            sorted.iter().sum::<f64>() / m as f64
        };
        let lo = (0.05 * m as f64).floor() as usize;
        let hi = (m - lo).max(lo + 1).min(m);
        let middle = &sorted[lo..hi];
        let trimmed_mean = middle.iter().sum::<f64>() / middle.len() as f64;
        Ok(Self {
            mean,
            p50: at(50.0)?,
            p75: at(75.0)?,
            p90: at(90.0)?,
            p95: at(95.0)?,
            p99: at(99.0)?,
            count: m,
            inf_count,
            trimmed_mean,
        })
    }
}
