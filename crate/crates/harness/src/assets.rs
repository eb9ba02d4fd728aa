//! Generated experiment assets: one network file per product plus a JSON
//! manifest with candidates, costs, budgets and seeds.

use std::path::Path;

use budgetmax::netgen::{generate_budgets, generate_costs, generate_network, KroneckerSpec};
use budgetmax::{seed, DiffusionNetwork};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, NetworkConfig};
use crate::error::{HarnessError, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub products: usize,
    pub node_count: usize,
    pub network: NetworkConfig,
    pub seed: u64,
    /// Candidate node ids, ascending.
    pub candidates: Vec<usize>,
    /// Raw cost of each candidate per product, largest 1.
    pub costs: Vec<Vec<f64>>,
    pub budgets: Vec<f64>,
    pub cost_exponent: f64,
    /// How the degree behind each cost is measured.
    pub cost_degree: String,
    pub network_files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Assets {
    pub manifest: Manifest,
    pub networks: Vec<DiffusionNetwork>,
}

fn network_file(product: usize) -> String {
    format!("product-{product:03}.net")
}

impl Assets {
    pub fn generate(cfg: &ExperimentConfig) -> Result<Self> {
        let spec = match cfg.network.seed_matrix {
            Some(m) => KroneckerSpec::new(m, cfg.network.power, cfg.network.kind)?,
            None => KroneckerSpec::preset(cfg.network.kind, cfg.network.power)?,
        };
        let network_seed = seed::derive(cfg.seed, "networks", 0);
        let networks = (0..cfg.products)
            .into_par_iter()
            .map(|i| generate_network(&spec, i, network_seed))
            .collect::<budgetmax::Result<Vec<_>>>()?;

        let n = spec.node_count();
        let mut candidates = index::sample(&mut seed::stream(cfg.seed, "candidates", 0), n, cfg.candidates).into_vec();
        candidates.sort_unstable();

        let costs = networks
            .iter()
            .map(|net| {
                let degrees: Vec<usize> = candidates.iter().map(|&v| net.out_degree(v)).collect();
                generate_costs(&degrees, cfg.cost_exponent)
            })
            .collect::<budgetmax::Result<Vec<_>>>()?;
        let budgets = match cfg.budget {
            Some(b) => vec![b; cfg.products],
            None => generate_budgets(cfg.products, &mut seed::stream(cfg.seed, "budgets", 0)),
        };

        let manifest = Manifest {
            products: cfg.products,
            node_count: n,
            network: cfg.network.clone(),
            seed: cfg.seed,
            candidates,
            costs,
            budgets,
            cost_exponent: cfg.cost_exponent,
            cost_degree: "out-degree + 1".into(),
            network_files: (0..cfg.products).map(network_file).collect(),
        };
        Ok(Assets { manifest, networks })
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (net, name) in self.networks.iter().zip(&self.manifest.network_files) {
            net.write_file(dir.join(name))?;
        }
        std::fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&self.manifest)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST))?)?;
        if manifest.network_files.len() != manifest.products
            || manifest.costs.len() != manifest.products
            || manifest.budgets.len() != manifest.products
        {
            return Err(HarnessError::Config(format!("{}: per-product lists disagree", dir.display())));
        }
        let networks = manifest
            .network_files
            .iter()
            .map(|name| DiffusionNetwork::read_file(dir.join(name)))
            .collect::<budgetmax::Result<Vec<_>>>()?;
        Ok(Assets { manifest, networks })
    }

    /// Loads from `cfg.assets` or generates, then checks the result fits `cfg`.
    pub fn for_config(cfg: &ExperimentConfig) -> Result<Self> {
        let assets = match &cfg.assets {
            Some(dir) => Assets::load(dir)?,
            None => Assets::generate(cfg)?,
        };
        if assets.manifest.products < cfg.products {
            return Err(HarnessError::Config(format!(
                "assets hold {} products, config asks for {}",
                assets.manifest.products, cfg.products
            )));
        }
        Ok(assets)
    }
}
