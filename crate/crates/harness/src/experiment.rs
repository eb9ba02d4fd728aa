//! Single runs and parameter sweeps over generated or loaded assets.

use std::path::Path;

use budgetmax::constraints::{normalize_costs, LaminarMatroid, Matroid, PartitionMatroid};
use budgetmax::influence::{build_coverage_index, build_sample_bank, CoverageIndex};
use budgetmax::optimizer::{
    density_enumeration, greedy_degree, greedy_degree_local, lazy_greedy, random_allocation, uniform_cost_greedy,
};
use budgetmax::{seed, ConstraintSystem, DiffusionNetwork, Objective, RunReport};
use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

use crate::assets::Assets;
use crate::cascades::{heldout_evaluate, load_cascades, CascadeRecord};
use crate::config::{Algorithm, Axis, ExperimentConfig, Mode};
use crate::error::{HarnessError, Result};

/// Objective, constraints and the networks behind them for one configuration.
pub struct Instance {
    pub objective: Objective,
    pub constraints: ConstraintSystem,
    pub networks: Vec<DiffusionNetwork>,
    pub candidates: Vec<usize>,
}

fn coverage_index(cfg: &ExperimentConfig, net: &DiffusionNetwork, product: usize, candidates: &[usize]) -> Result<CoverageIndex> {
    let sample_seed = seed::derive(cfg.seed, "samples", product as u64);
    let horizon = cfg.horizon_of(product);
    let cached = cfg.cache_dir.as_ref().map(|dir| dir.join(format!("product-{product:03}.bmci")));
    if let Some(path) = &cached {
        if let Ok(idx) = CoverageIndex::read_cache_file(path) {
            if idx.matches_key(net, sample_seed, cfg.samples, horizon) && idx.candidates() == candidates {
                debug!("reusing coverage index {}", path.display());
                return Ok(idx);
            }
        }
    }
    let bank = build_sample_bank(net, cfg.samples, sample_seed)?;
    let idx = build_coverage_index(&bank, net, candidates, horizon)?;
    if let Some(path) = &cached {
        std::fs::create_dir_all(path.parent().expect("cache path has a parent"))?;
        idx.write_cache_file(path)?;
    }
    Ok(idx)
}

pub fn build_instance(cfg: &ExperimentConfig, assets: &Assets) -> Result<Instance> {
    let networks: Vec<DiffusionNetwork> = assets.networks[..cfg.products].to_vec();
    let candidates = assets.manifest.candidates.clone();
    let users = candidates.len();
    let indices = networks
        .par_iter()
        .enumerate()
        .map(|(i, net)| coverage_index(cfg, net, i, &candidates))
        .collect::<Result<Vec<_>>>()?;
    let weights = cfg.weights.clone().unwrap_or_else(|| vec![1.0; cfg.products]);
    let objective = Objective::weighted(indices, weights)?;

    let mut matroids: Vec<Matroid> = vec![PartitionMatroid::per_user(cfg.products, vec![cfg.user_capacity; users])?.into()];
    let knapsack = match cfg.mode {
        Mode::Uniform => {
            matroids.push(PartitionMatroid::per_product(users, vec![cfg.product_capacity; cfg.products])?.into());
            None
        }
        Mode::Budgeted => {
            let costs = &assets.manifest.costs[..cfg.products];
            let budgets: Vec<f64> = match cfg.budget {
                Some(b) => vec![b; cfg.products],
                None => assets.manifest.budgets[..cfg.products].to_vec(),
            };
            Some(normalize_costs(costs, &budgets)?)
        }
    };
    if let (Some(count), Some(limit)) = (cfg.group_count, cfg.group_limit) {
        let size = users.div_ceil(count);
        let groups = (0..users).step_by(size.max(1)).map(|s| ((s..(s + size).min(users)).collect(), limit)).collect();
        matroids.push(LaminarMatroid::user_communities(cfg.products, users, groups)?.into());
    }
    let constraints = ConstraintSystem::new(cfg.products, users, matroids, knapsack)?;
    Ok(Instance { objective, constraints, networks, candidates })
}

pub fn run_algorithm(cfg: &ExperimentConfig, instance: &Instance, algorithm: Algorithm) -> Result<RunReport> {
    let Instance { objective, constraints, networks, .. } = instance;
    let report = match algorithm {
        Algorithm::Budgetmax if constraints.knapsack().is_some() => density_enumeration(objective, constraints, cfg.delta)?,
        Algorithm::Budgetmax => uniform_cost_greedy(objective, constraints, cfg.delta)?,
        Algorithm::Lazy => lazy_greedy(objective, constraints)?,
        Algorithm::Degree => greedy_degree(objective, networks, constraints, cfg.mode == Mode::Budgeted)?,
        Algorithm::DegreeLocal => greedy_degree_local(objective, networks, constraints)?,
        Algorithm::Random => random_allocation(objective, constraints, seed::derive(cfg.seed, "random", 0))?,
    };
    Ok(report)
}

/// One line of a result table. `wall_secs` is the only column that varies
/// between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub algorithm: String,
    pub axis: String,
    pub axis_value: f64,
    pub products: usize,
    pub candidates: usize,
    pub objective: f64,
    pub heldout: Option<f64>,
    pub relative_to_lazy: Option<f64>,
    pub active_knapsacks: usize,
    pub evaluations: u64,
    pub solution_size: usize,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub reports: Vec<RunReport>,
    pub rows: Vec<Row>,
}

/// Allocation as `(product, node id)` pairs.
pub fn allocation(report: &RunReport, candidates: &[usize]) -> Vec<(usize, usize)> {
    report.solution.iter().map(|z| (z.product, candidates[z.user])).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_point(cfg, None)
}

fn run_point(cfg: &ExperimentConfig, point: Option<(Axis, f64)>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let assets = Assets::for_config(cfg)?;
    let instance = build_instance(cfg, &assets)?;
    let cascades: Option<Vec<CascadeRecord>> = cfg.cascades.as_ref().map(load_cascades).transpose()?;
    info!(
        "running {} algorithm(s) on {} products x {} candidates",
        cfg.algorithms.len(),
        cfg.products,
        instance.candidates.len()
    );

    let mut reports = Vec::with_capacity(cfg.algorithms.len());
    for &algo in &cfg.algorithms {
        let report = run_algorithm(cfg, &instance, algo)?;
        debug!("{algo}: value {} with {} evaluations", report.value, report.evaluations);
        reports.push(report);
    }
    let lazy_value = reports.iter().find(|r| r.algorithm == "lazy").map(|r| r.value);
    let rows = reports
        .iter()
        .map(|r| Row {
            algorithm: r.algorithm.clone(),
            axis: point.map_or("none".into(), |(a, _)| a.name().into()),
            axis_value: point.map_or(0.0, |(_, v)| v),
            products: cfg.products,
            candidates: instance.candidates.len(),
            objective: r.value,
            heldout: cascades.as_ref().map(|c| heldout_evaluate(&allocation(r, &instance.candidates), c)),
            relative_to_lazy: lazy_value.filter(|&v| v > 0.0).map(|v| r.value / v),
            active_knapsacks: r.active_knapsacks,
            evaluations: r.evaluations,
            solution_size: r.solution.len(),
            wall_secs: r.elapsed_secs,
        })
        .collect();
    Ok(ExperimentResult { config: cfg.clone(), reports, rows })
}

/// One experiment per axis value, run on up to `workers` threads. The δ axis
/// always includes lazy greedy so rows carry the relative value.
pub fn sweep(cfg: &ExperimentConfig, axis: Axis, values: &[f64], workers: usize) -> Result<Vec<ExperimentResult>> {
    if values.is_empty() {
        return Err(HarnessError::Config(format!("sweep over {axis} has no values")));
    }
    let mut base = cfg.clone();
    if axis == Axis::Delta && !base.algorithms.contains(&Algorithm::Lazy) {
        base.algorithms.push(Algorithm::Lazy);
    }
    let points = values.iter().map(|&v| base.with_axis(axis, v)).collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        points
            .par_iter()
            .zip(values)
            .map(|(p, &v)| run_point(p, Some((axis, v))))
            .collect::<Result<Vec<_>>>()
    })
}

pub fn write_rows_csv(path: impl AsRef<Path>, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
