//! Classical sampling-based NDV estimators. Each is a pure function of the
//! frequency profile (plus solver settings for the ones that need a root).

mod closed_form;
mod hypergeometric;
mod mom;
mod sichel;
mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ext_real;
use crate::profiles::FrequencyProfile;

pub use closed_form::{bootstrap, chao, eb, gee, goodman, jackknife1, shlosser};
pub use hypergeometric::{h_n, horvitz_thompson, mom2};
pub use mom::mom1;
pub use sichel::{sichel, sichel_equation, solve as sichel_solve, SichelSolution};
pub use solver::SolverConfig;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("{method} needs a non-empty sample")]
    EmptySample { method: Method },
    #[error("{method} needs at least {needed} sampled rows, got {n}")]
    TooFewRows { method: Method, needed: u64, n: u64 },
}

/// The registered classical estimators, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Goodman,
    Gee,
    Eb,
    Chao,
    Shlosser,
    Jackknife,
    Sichel,
    Bootstrap,
    Ht,
    Mom1,
    Mom2,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Goodman,
        Method::Gee,
        Method::Eb,
        Method::Chao,
        Method::Shlosser,
        Method::Jackknife,
        Method::Sichel,
        Method::Bootstrap,
        Method::Ht,
        Method::Mom1,
        Method::Mom2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Goodman => "goodman",
            Method::Gee => "gee",
            Method::Eb => "eb",
            Method::Chao => "chao",
            Method::Shlosser => "shlosser",
            Method::Jackknife => "jackknife",
            Method::Sichel => "sichel",
            Method::Bootstrap => "bootstrap",
            Method::Ht => "ht",
            Method::Mom1 => "mom1",
            Method::Mom2 => "mom2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| format!("unknown estimator {s:?}"))
    }
}

/// An NDV estimate. `value` is the raw estimator output and may be
/// non-positive or non-finite; `clamped` is only filled by [`clamp_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub method: Method,
    #[serde(with = "ext_real")]
    pub value: f64,
    pub fallback_used: bool,
    /// The value hit a representation limit or the solver's upper cap.
    #[serde(default)]
    pub saturated: bool,
    #[serde(with = "ext_real::option", default, skip_serializing_if = "Option::is_none")]
    pub clamped: Option<f64>,
}

impl Estimate {
    pub(crate) fn new(method: Method, value: f64) -> Self {
        Self {
            method,
            value,
            fallback_used: false,
            saturated: !value.is_finite(),
            clamped: None,
        }
    }

    pub(crate) fn fallback(method: Method, value: f64) -> Self {
        Self {
            fallback_used: true,
            ..Self::new(method, value)
        }
    }

    pub(crate) fn saturated(method: Method, value: f64) -> Self {
        Self {
            saturated: true,
            ..Self::new(method, value)
        }
    }

    /// The clamped value when present, otherwise the raw value.
    pub fn effective(&self) -> f64 {
        self.clamped.unwrap_or(self.value)
    }
}

/// Runs one estimator.
pub fn estimate(method: Method, profile: &FrequencyProfile, solver: &SolverConfig) -> Result<Estimate, EstimatorError> {
    match method {
        Method::Goodman => goodman(profile),
        Method::Gee => gee(profile),
        Method::Eb => eb(profile),
        Method::Chao => chao(profile),
        Method::Shlosser => shlosser(profile),
        Method::Jackknife => jackknife1(profile),
        Method::Sichel => sichel(profile, solver),
        Method::Bootstrap => bootstrap(profile),
        Method::Ht => horvitz_thompson(profile),
        Method::Mom1 => mom1(profile, solver),
        Method::Mom2 => mom2(profile, solver),
    }
}

/// Outcome of one registry entry.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimateOutcome {
    Estimated(Estimate),
    NotApplicable { method: Method, reason: String },
}

impl EstimateOutcome {
    pub fn method(&self) -> Method {
        match self {
            EstimateOutcome::Estimated(e) => e.method,
            EstimateOutcome::NotApplicable { method, .. } => *method,
        }
    }

    pub fn estimate(&self) -> Option<&Estimate> {
        match self {
            EstimateOutcome::Estimated(e) => Some(e),
            EstimateOutcome::NotApplicable { .. } => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct OutcomeRecord {
    method: Method,
    #[serde(with = "ext_real::option")]
    value: Option<f64>,
    #[serde(default)]
    fallback_used: bool,
    #[serde(default)]
    saturated: bool,
    #[serde(with = "ext_real::option", default, skip_serializing_if = "Option::is_none")]
    clamped: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    not_applicable: Option<String>,
}

impl Serialize for EstimateOutcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let record = match self {
            EstimateOutcome::Estimated(e) => OutcomeRecord {
                method: e.method,
                value: Some(e.value),
                fallback_used: e.fallback_used,
                saturated: e.saturated,
                clamped: e.clamped,
                not_applicable: None,
            },
            EstimateOutcome::NotApplicable { method, reason } => OutcomeRecord {
                method: *method,
                value: None,
                fallback_used: false,
                saturated: false,
                clamped: None,
                not_applicable: Some(reason.clone()),
            },
        };
        record.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EstimateOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = OutcomeRecord::deserialize(deserializer)?;
        Ok(match (r.value, r.not_applicable) {
            (Some(value), None) => EstimateOutcome::Estimated(Estimate {
                method: r.method,
                value,
                fallback_used: r.fallback_used,
                saturated: r.saturated,
                clamped: r.clamped,
            }),
            (_, reason) => EstimateOutcome::NotApplicable {
                method: r.method,
                reason: reason.unwrap_or_default(),
            },
        })
    }
}

/// Runs every registered estimator. Never fails: estimators whose
/// preconditions do not hold are reported as not applicable.
pub fn estimate_all(profile: &FrequencyProfile, solver: &SolverConfig) -> Vec<EstimateOutcome> {
    Method::ALL
        .into_iter()
        .map(|method| match estimate(method, profile, solver) {
            Ok(e) => EstimateOutcome::Estimated(e),
            Err(err) => EstimateOutcome::NotApplicable {
                method,
                reason: err.to_string(),
            },
        })
        .collect()
}

/// Fills `clamped` with the raw value forced into `[max(d, 1), N]`.
pub fn clamp_estimate(estimate: Estimate, d: u64, population: u64) -> Estimate {
    let lo = d.max(1) as f64;
    let hi = (population as f64).max(lo);
    let v = estimate.value;
    let clamped = if v == f64::INFINITY {
        hi
    } else if !(v > 0.0) || !v.is_finite() {
        lo
    } else {
        v.clamp(lo, hi)
    };
    Estimate {
        clamped: Some(clamped),
        ..estimate
    }
}
