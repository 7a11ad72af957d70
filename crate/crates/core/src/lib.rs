//! Schema-driven protobuf test-data generation: descriptor parsing, corpus
//! analysis, dependency-aware generation, and statistical quality assessment.

pub mod analyzer;
pub mod baselines;
pub mod corpus;
pub mod depgraph;
pub mod engine;
pub mod descriptor;
pub mod error;
pub mod pattern;
pub mod quality;
pub mod registry;
pub mod schema;
pub mod stats;
pub mod value;
pub mod wire;

pub use error::{Error, Result};

/// Concrete f64 alias for the generic numeric summary.
pub type NumericSummary = stats::NumericSummary<f64>;
