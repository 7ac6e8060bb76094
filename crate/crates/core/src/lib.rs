//! Number-of-distinct-values (NDV) estimation under minimal data access.
//!
//! The crate is organised along the estimation pipeline:
//!
//! - [`corpus`]: CSV ingestion, column filtering, dataset splits, exact NDV.
//! - [`profiles`]: sequential / random samples and frequency profiles.
//! - [`estimators`]: the classical sampling-based estimators.
//! - [`semantics`]: schema serialization and column embeddings.
//! - [`model`]: the learned estimator (column interaction + MLP) and training.
//! - [`eval`]: q-error, percentile reports, benchmark and layout experiments.

pub mod corpus;
pub mod estimators;
pub mod eval;
pub mod ext_real;
pub mod model;
pub mod profiles;
pub mod semantics;

pub use corpus::{ColumnData, ColumnSchema, GroundTruth, TableRecord};
pub use estimators::{Estimate, Method, SolverConfig};
pub use profiles::{FrequencyProfile, Sample};
