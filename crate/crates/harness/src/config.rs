//! Experiment configuration: a single JSON document. Missing fields take the
//! defaults below, and the resolved document is echoed into every report.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use budgetmax::netgen::KroneckerKind;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// User caps plus per-product capacities.
    Uniform,
    /// User caps plus per-product budgets over degree-based costs.
    Budgeted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Budgetmax,
    Lazy,
    Degree,
    DegreeLocal,
    Random,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Budgetmax => "budgetmax",
            Algorithm::Lazy => "lazy",
            Algorithm::Degree => "degree",
            Algorithm::DegreeLocal => "degree-local",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "budgetmax" => Ok(Algorithm::Budgetmax),
            "lazy" => Ok(Algorithm::Lazy),
            "degree" => Ok(Algorithm::Degree),
            "degree-local" => Ok(Algorithm::DegreeLocal),
            "random" => Ok(Algorithm::Random),
            other => Err(HarnessError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Products,
    ProductBudget,
    UserConstraint,
    TimeWindow,
    Delta,
    GroupLimit,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Products => "products",
            Axis::ProductBudget => "product_budget",
            Axis::UserConstraint => "user_constraint",
            Axis::TimeWindow => "time_window",
            Axis::Delta => "delta",
            Axis::GroupLimit => "group_limit",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "products" => Ok(Axis::Products),
            "product_budget" => Ok(Axis::ProductBudget),
            "user_constraint" => Ok(Axis::UserConstraint),
            "time_window" => Ok(Axis::TimeWindow),
            "delta" => Ok(Axis::Delta),
            "group_limit" => Ok(Axis::GroupLimit),
            other => Err(HarnessError::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub kind: KroneckerKind,
    /// Networks have `2^power` nodes.
    pub power: u32,
    /// Required when `kind` is `custom`.
    pub seed_matrix: Option<[[f64; 2]; 2]>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { kind: KroneckerKind::CorePeriphery, power: 10, seed_matrix: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Option<Axis>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub products: usize,
    /// Size of the candidate user set, sampled from the network nodes.
    pub candidates: usize,
    pub network: NetworkConfig,
    pub mode: Mode,
    /// Per-user cap `u_j`.
    pub user_capacity: usize,
    /// Per-product cap `b_i` in uniform mode.
    pub product_capacity: usize,
    /// Fixed budget for every product in budgeted mode; random when absent.
    pub budget: Option<f64>,
    /// Cost exponent `n` in `c ∝ (d+1)^{-n}`.
    pub cost_exponent: f64,
    /// Candidates split into this many contiguous communities, each limited
    /// to `group_limit` assignments. No communities when absent.
    pub group_count: Option<usize>,
    pub group_limit: Option<usize>,
    /// Time window shared by all products unless `horizons` is given.
    pub horizon: f64,
    pub horizons: Option<Vec<f64>>,
    pub delta: f64,
    pub samples: usize,
    pub weights: Option<Vec<f64>>,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Directory written by `generate`; assets are generated when absent.
    pub assets: Option<PathBuf>,
    /// Held-out cascades for evaluation.
    pub cascades: Option<PathBuf>,
    /// Store coverage indices here and reuse matching ones.
    pub cache_dir: Option<PathBuf>,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            products: 8,
            candidates: 64,
            network: NetworkConfig::default(),
            mode: Mode::Uniform,
            user_capacity: 2,
            product_capacity: 8,
            budget: None,
            cost_exponent: 3.0,
            group_count: None,
            group_limit: None,
            horizon: 5.0,
            horizons: None,
            delta: 0.01,
            samples: 256,
            weights: None,
            seed: 1,
            algorithms: vec![Algorithm::Budgetmax, Algorithm::Lazy, Algorithm::Degree, Algorithm::Random],
            assets: None,
            cascades: None,
            cache_dir: None,
            sweep: SweepConfig::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn node_count(&self) -> usize {
        1 << self.network.power
    }

    /// Time window of product `i`.
    pub fn horizon_of(&self, product: usize) -> f64 {
        self.horizons.as_ref().map_or(self.horizon, |h| h[product])
    }

    pub fn validate(&self) -> Result<()> {
        if self.products == 0 {
            return Err(config_err("products must be at least 1"));
        }
        if self.candidates == 0 {
            return Err(config_err("candidates must be at least 1"));
        }
        if self.network.power > 16 {
            return Err(config_err(format!("network power {} is too large", self.network.power)));
        }
        if self.candidates > self.node_count() {
            return Err(config_err(format!(
                "{} candidates but networks have {} nodes",
                self.candidates,
                self.node_count()
            )));
        }
        if self.network.kind == KroneckerKind::Custom && self.network.seed_matrix.is_none() {
            return Err(config_err("custom networks need seed_matrix"));
        }
        if self.network.kind != KroneckerKind::Custom && self.network.seed_matrix.is_some() {
            return Err(config_err("seed_matrix is only used with kind = custom"));
        }
        if self.mode == Mode::Uniform && self.budget.is_some() {
            return Err(config_err("budget applies to budgeted mode; use product_capacity in uniform mode"));
        }
        if let Some(b) = self.budget {
            if !(b > 0.0 && b.is_finite()) {
                return Err(config_err(format!("budget must be positive, got {b}")));
            }
        }
        if !(self.cost_exponent >= 0.0 && self.cost_exponent.is_finite()) {
            return Err(config_err("cost_exponent must be non-negative"));
        }
        match (self.group_count, self.group_limit) {
            (Some(0), _) => return Err(config_err("group_count must be at least 1")),
            (Some(_), None) | (None, Some(_)) => {
                return Err(config_err("group_count and group_limit must be given together"))
            }
            _ => {}
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(config_err(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        if let Some(h) = &self.horizons {
            if h.len() != self.products {
                return Err(config_err(format!("{} horizons for {} products", h.len(), self.products)));
            }
            if h.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(config_err("horizons must be non-negative"));
            }
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(config_err(format!("delta must be positive, got {}", self.delta)));
        }
        if self.samples == 0 {
            return Err(config_err("samples must be at least 1"));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.products {
                return Err(config_err(format!("{} weights for {} products", w.len(), self.products)));
            }
            if w.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(config_err("weights must be positive"));
            }
        }
        if self.algorithms.is_empty() {
            return Err(config_err("at least one algorithm is required"));
        }
        for path in [&self.assets, &self.cascades].into_iter().flatten() {
            if !path.exists() {
                return Err(config_err(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// Copy with `axis` set to `value`. Per-product lists are dropped when
    /// the product count changes.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(config_err(format!("axis {axis} needs whole numbers, got {v}")))
            }
        };
        match axis {
            Axis::Products => {
                cfg.products = count(value)?;
                if cfg.products != self.products {
                    cfg.horizons = None;
                    cfg.weights = None;
                }
            }
            Axis::ProductBudget => match cfg.mode {
                Mode::Uniform => cfg.product_capacity = count(value)?,
                Mode::Budgeted => cfg.budget = Some(value),
            },
            Axis::UserConstraint => cfg.user_capacity = count(value)?,
            Axis::TimeWindow => {
                cfg.horizon = value;
                cfg.horizons = None;
            }
            Axis::Delta => cfg.delta = value,
            Axis::GroupLimit => {
                cfg.group_limit = Some(count(value)?);
                cfg.group_count.get_or_insert(4);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::from_json(r#"{"products": 3}"#).unwrap();
        assert_eq!(cfg.products, 3);
        assert_eq!(cfg.candidates, 64);
        assert_eq!(cfg.network.kind, KroneckerKind::CorePeriphery);
        let echoed = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(echoed, cfg);
    }

    #[test]
    fn invalid_configs_rejected() {
        for bad in [
            r#"{"products": 0}"#,
            r#"{"mode": "uniform", "budget": 2.0}"#,
            r#"{"delta": 0}"#,
            r#"{"group_count": 2}"#,
            r#"{"products": 2, "weights": [1.0]}"#,
            r#"{"network": {"kind": "custom", "power": 3}}"#,
            r#"{"candidates": 5000}"#,
            r#"{"unknown_field": 1}"#,
            r#"{"cascades": "/nonexistent/file"}"#,
        ] {
            let err = ExperimentConfig::from_json(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn axis_application() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.with_axis(Axis::Products, 16.0).unwrap().products, 16);
        assert_eq!(cfg.with_axis(Axis::ProductBudget, 4.0).unwrap().product_capacity, 4);
        assert_eq!(cfg.with_axis(Axis::TimeWindow, 2.5).unwrap().horizon, 2.5);
        let g = cfg.with_axis(Axis::GroupLimit, 3.0).unwrap();
        assert_eq!((g.group_count, g.group_limit), (Some(4), Some(3)));
        assert!(cfg.with_axis(Axis::UserConstraint, 1.5).is_err());
        assert_eq!("time-window".parse::<Axis>().unwrap(), Axis::TimeWindow);
        assert_eq!("degree-local".parse::<Algorithm>().unwrap(), Algorithm::DegreeLocal);
    }
}
