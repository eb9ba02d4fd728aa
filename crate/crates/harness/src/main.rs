use std::path::{Path, PathBuf};
use std::process::ExitCode;

use budgetmax_harness::assets::Assets;
use budgetmax_harness::brute::{brute_check, median};
use budgetmax_harness::cascades::{heldout_evaluate, load_cascades};
use budgetmax_harness::experiment::{allocation, run_experiment, sweep, write_json, write_rows_csv};
use budgetmax_harness::{Algorithm, Axis, ExperimentConfig, HarnessError, Mode, Result};
use clap::{Args, Parser, Subcommand};
use log::{error, info};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "budgetmax", version, about = "Budgeted multi-product influence maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write networks and a manifest of candidates, costs and budgets.
    Generate(Common),
    /// Run the configured algorithms once.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Algorithms to run, overriding the config. Repeatable.
        #[arg(long = "algo")]
        algos: Vec<Algorithm>,
    },
    /// Run one experiment per value of an axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: Option<Axis>,
        /// Comma-separated axis values, overriding the config.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long = "algo")]
        algos: Vec<Algorithm>,
    },
    /// Compare greedy with brute force on small random instances.
    BruteCheck {
        #[arg(long, value_enum, default_value = "uniform")]
        mode: ModeArg,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Held-out value of an allocation against observed cascades.
    Evaluate {
        #[arg(long)]
        cascades: PathBuf,
        /// JSON list of {"product": i, "node": v}.
        #[arg(long)]
        allocation: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Uniform,
    Budgeted,
}

#[derive(Serialize, Deserialize)]
struct Assignment {
    product: usize,
    node: usize,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = load_config(&common)?;
            let assets = Assets::generate(&cfg)?;
            assets.write(&common.out)?;
            info!("wrote {} networks to {}", assets.networks.len(), common.out.display());
        }
        Command::Optimize { common, algos } => {
            let mut cfg = load_config(&common)?;
            if !algos.is_empty() {
                cfg.algorithms = algos;
            }
            prepare_out(&common.out)?;
            let result = run_experiment(&cfg)?;
            write_rows_csv(common.out.join("results.csv"), &result.rows)?;
            write_json(common.out.join("report.json"), &result)?;
            let candidates = Assets::for_config(&cfg)?.manifest.candidates;
            for r in &result.reports {
                let alloc: Vec<Assignment> =
                    allocation(r, &candidates).into_iter().map(|(product, node)| Assignment { product, node }).collect();
                write_json(common.out.join(format!("allocation-{}.json", r.algorithm)), &alloc)?;
            }
            for row in &result.rows {
                println!("{:<13} {:>12.4} {:>8} evaluations", row.algorithm, row.objective, row.evaluations);
            }
        }
        Command::Sweep { common, axis, values, workers, algos } => {
            let mut cfg = load_config(&common)?;
            if !algos.is_empty() {
                cfg.algorithms = algos;
            }
            let axis = axis
                .or(cfg.sweep.axis)
                .ok_or_else(|| HarnessError::Config("no sweep axis given".into()))?;
            let values = if values.is_empty() { cfg.sweep.values.clone() } else { values };
            prepare_out(&common.out)?;
            let results = sweep(&cfg, axis, &values, workers)?;
            let rows: Vec<_> = results.iter().flat_map(|r| r.rows.clone()).collect();
            write_rows_csv(common.out.join("sweep.csv"), &rows)?;
            write_json(common.out.join("sweep.json"), &results)?;
            info!("wrote {} rows to {}", rows.len(), common.out.join("sweep.csv").display());
        }
        Command::BruteCheck { mode, count, delta, seed, out } => {
            let mode = match mode {
                ModeArg::Uniform => Mode::Uniform,
                ModeArg::Budgeted => Mode::Budgeted,
            };
            if !(delta > 0.0) {
                return Err(HarnessError::Config(format!("delta must be positive, got {delta}")));
            }
            let rows = brute_check(mode, count, seed, delta)?;
            let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
            let violations = rows.iter().filter(|r| !r.holds).count();
            println!(
                "{count} instances: min ratio {:.4}, median {:.4}, bound violations {violations}",
                ratios.iter().copied().fold(f64::INFINITY, f64::min),
                median(&mut ratios)
            );
            if let Some(dir) = out {
                prepare_out(&dir)?;
                let mut w = csv::Writer::from_path(dir.join("brute.csv"))?;
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
        Command::Evaluate { cascades, allocation } => {
            let records = load_cascades(&cascades)?;
            let alloc: Vec<Assignment> = serde_json::from_str(&std::fs::read_to_string(&allocation)?)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", allocation.display())))?;
            let pairs: Vec<(usize, usize)> = alloc.iter().map(|a| (a.product, a.node)).collect();
            println!("{}", heldout_evaluate(&pairs, &records));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
