//! Budgeted influence maximization for multiple products over continuous-time
//! diffusion networks.
//!
//! The crate is organized bottom-up:
//!
//! * [`diffusion`] holds per-product networks, transmission-time sampling and
//!   earliest-arrival cascades.
//! * [`influence`] turns a bank of sampled delays into a coverage index, so that
//!   the Monte-Carlo influence estimate is an exact coverage function.
//! * [`objective`] sums weighted per-product influence over the ground set of
//!   (product, user) assignments.
//! * [`constraints`] provides partition and laminar matroids plus per-product
//!   knapsack budgets with incremental feasibility checks.
//! * [`optimizer`] implements adaptive-threshold greedy, density-threshold
//!   enumeration, lazy greedy, and the degree and random baselines.
//! * [`exact`] provides closed-form influence values and brute-force optima for
//!   small instances.
//! * [`netgen`] generates Kronecker networks, Weibull dynamics, costs and budgets.

pub mod constraints;
pub mod diffusion;
mod error;
pub mod exact;
pub mod influence;
pub mod netgen;
pub mod objective;
pub mod optimizer;
pub mod seed;

pub use constraints::{ConstraintState, ConstraintSystem, Feasibility, GroundSet};
pub use diffusion::{DiffusionNetwork, TransmissionFunction};
pub use error::{Error, Result};
pub use influence::{CoverageIndex, CoverageState, SampleBank};
pub use objective::{GroundElement, Objective, ObjectiveState};
pub use optimizer::{GreedyConfig, RunReport};
