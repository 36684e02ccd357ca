//! Temporal-driven constrained clustering of entity/timestamp/description
//! observations.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`model`]: observations, datasets with cached diameters, centroids and partitions;
//! * [`dissimilarity`]: the temporal-aware measure and its `alpha` slider;
//! * [`constraints`]: soft must-link contiguity penalties (Gaussian and threshold);
//! * [`engine`]: the iterative relocation optimizer and its baseline variants;
//! * [`metrics`]: MDvar, Tvar, ShaP and the dispersion ratio;
//! * [`graph`]: a-posteriori evolution graph induction and DOT rendering;
//! * [`preprocess`]: entity fixed-effect removal and attribute scaling;
//! * [`synth`]: planted-phase panel generator and recovery scoring;
//! * [`tuning`]: the curve-intersection heuristic used by parameter sweeps.
//!
//! File formats, CSV handling and the command-line front end live in the
//! companion `tdck` crate.

#![no_std]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod dissimilarity;
pub mod engine;
mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod preprocess;
pub mod synth;
pub mod tuning;

pub use constraints::{PenaltyConfig, PenaltyKind};
pub use dissimilarity::{Diameters, TemporalPoint, TuningWeights};
pub use engine::{AlgorithmConfig, CentroidSolver, RunResult, StopReason, Variant};
pub use error::{Error, Result};
pub use graph::EvolutionGraph;
pub use metrics::MetricReport;
pub use model::{Centroid, Dataset, EntityId, Observation, Partition};
