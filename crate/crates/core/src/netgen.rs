//! Synthetic assets: Kronecker networks with Weibull dynamics, degree-based
//! costs and randomized budgets.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionNetwork, Edge, TransmissionFunction};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KroneckerKind {
    CorePeriphery,
    Random,
    Hierarchical,
    Custom,
}

impl KroneckerKind {
    pub fn seed_matrix(self) -> Option<[[f64; 2]; 2]> {
        match self {
            KroneckerKind::CorePeriphery => Some([[0.9, 0.5], [0.5, 0.3]]),
            KroneckerKind::Random => Some([[0.5, 0.5], [0.5, 0.5]]),
            KroneckerKind::Hierarchical => Some([[0.9, 0.1], [0.1, 0.9]]),
            KroneckerKind::Custom => None,
        }
    }
}

impl fmt::Display for KroneckerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KroneckerKind::CorePeriphery => "core-periphery",
            KroneckerKind::Random => "random",
            KroneckerKind::Hierarchical => "hierarchical",
            KroneckerKind::Custom => "custom",
        })
    }
}

impl FromStr for KroneckerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core-periphery" => Ok(KroneckerKind::CorePeriphery),
            "random" => Ok(KroneckerKind::Random),
            "hierarchical" => Ok(KroneckerKind::Hierarchical),
            "custom" => Ok(KroneckerKind::Custom),
            other => Err(Error::InvalidConfig(format!("unknown network type `{other}`"))),
        }
    }
}

/// 2×2 seed matrix raised to the `power`-th Kronecker power (`2^power` nodes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSpec {
    pub seed: [[f64; 2]; 2],
    pub power: u32,
    pub kind: KroneckerKind,
}

impl KroneckerSpec {
    pub fn preset(kind: KroneckerKind, power: u32) -> Result<Self> {
        let seed = kind
            .seed_matrix()
            .ok_or_else(|| Error::InvalidConfig("custom networks need an explicit seed matrix".into()))?;
        KroneckerSpec::new(seed, power, kind)
    }

    pub fn new(seed: [[f64; 2]; 2], power: u32, kind: KroneckerKind) -> Result<Self> {
        if seed.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig(format!("seed entries must lie in [0, 1]: {seed:?}")));
        }
        if power > 20 {
            return Err(Error::InvalidConfig(format!("power {power} is too large for exact sampling")));
        }
        Ok(KroneckerSpec { seed, power, kind })
    }

    pub fn node_count(&self) -> usize {
        1 << self.power
    }

    /// Expected number of edges, excluding self-loops.
    pub fn expected_edges(&self) -> f64 {
        let s = &self.seed;
        let all = (s[0][0] + s[0][1] + s[1][0] + s[1][1]).powi(self.power as i32);
        all - (s[0][0] + s[1][1]).powi(self.power as i32)
    }

    /// Variance of the edge count, excluding self-loops.
    pub fn edge_variance(&self) -> f64 {
        let s = &self.seed;
        let sq = |x: f64| x * x;
        let all = (sq(s[0][0]) + sq(s[0][1]) + sq(s[1][0]) + sq(s[1][1])).powi(self.power as i32);
        let squares = all - (sq(s[0][0]) + sq(s[1][1])).powi(self.power as i32);
        self.expected_edges() - squares
    }
}

/// Edge probability of `(u, v)`: the product over bit positions of
/// `seed[bit_u][bit_v]`.
pub fn kronecker_probability(spec: &KroneckerSpec, u: usize, v: usize) -> f64 {
    (0..spec.power).map(|b| spec.seed[(u >> b) & 1][(v >> b) & 1]).product()
}

/// Samples every ordered pair `u ≠ v` independently. Each source row draws
/// from its own stream, so the result depends only on `seed`.
pub fn sample_kronecker_graph(spec: &KroneckerSpec, seed: u64) -> Vec<(usize, usize)> {
    let n = spec.node_count();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let mut rng = seed::stream(seed, "kronecker-row", u as u64);
            (0..n)
                .filter(move |&v| v != u && rng.random::<f64>() < kronecker_probability(spec, u, v))
                .map(move |v| (u, v))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Weibull transmission per edge, shape and scale each uniform on `[1, 10]`.
pub fn assign_weibull<R: Rng + ?Sized>(edge_count: usize, rng: &mut R) -> Vec<TransmissionFunction> {
    (0..edge_count)
        .map(|_| TransmissionFunction::Weibull {
            shape: rng.random_range(1.0..=10.0),
            scale: rng.random_range(1.0..=10.0),
        })
        .collect()
}

/// Kronecker structure plus Weibull dynamics for one product.
pub fn generate_network(spec: &KroneckerSpec, product: usize, seed: u64) -> Result<DiffusionNetwork> {
    let pairs = sample_kronecker_graph(spec, seed::derive(seed, "structure", product as u64));
    let tfs = assign_weibull(pairs.len(), &mut seed::stream(seed, "weibull", product as u64));
    let edges = pairs.into_iter().zip(tfs).map(|((src, dst), tf)| Edge { src, dst, tf }).collect();
    DiffusionNetwork::new(spec.node_count(), product, edges)
}

/// Costs `(d_j + 1)^{−n}` rescaled so the largest is 1.
pub fn generate_costs(degrees: &[usize], exponent: f64) -> Result<Vec<f64>> {
    if !(exponent.is_finite() && exponent >= 0.0) {
        return Err(Error::InvalidCost(format!("cost exponent must be non-negative, got {exponent}")));
    }
    let raw: Vec<f64> = degrees.iter().map(|&d| (d as f64 + 1.0).powf(-exponent)).collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    Ok(raw.into_iter().map(|c| c / max).collect())
}

/// Budgets `B_i = U{1..10} + U[0, 1)`.
pub fn generate_budgets<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(1..=10) as f64 + rng.random::<f64>()).collect()
}
