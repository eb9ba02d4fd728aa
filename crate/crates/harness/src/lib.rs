//! Experiment harness for budgeted multi-product influence maximization:
//! JSON configuration, asset generation, held-out cascade evaluation,
//! parameter sweeps and brute-force checks.

pub mod assets;
pub mod brute;
pub mod cascades;
pub mod config;
mod error;
pub mod experiment;
pub mod instances;

pub use config::{Algorithm, Axis, ExperimentConfig, Mode};
pub use error::{HarnessError, Result};
