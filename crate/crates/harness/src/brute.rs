//! Greedy against brute force on small random instances.

use budgetmax::exact::brute_force_optimum;
use budgetmax::optimizer::{density_enumeration, greedy_fixed_density, GreedyConfig};
use budgetmax::seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Mode;
use crate::error::Result;
use crate::instances::{budget_instance, uniform_instance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteRow {
    pub instance: usize,
    pub products: usize,
    pub users: usize,
    pub optimum: f64,
    pub value: f64,
    /// `value / optimum`, or 1 when the optimum is 0.
    pub ratio: f64,
    /// Guaranteed fraction of the optimum for this run.
    pub bound: f64,
    pub holds: bool,
    pub active_knapsacks: usize,
    /// Whether every prefix of the blocking trace stays within `P·t`
    /// (uniform mode only).
    pub blocking_holds: Option<bool>,
}

/// Uniform mode runs threshold greedy with `ρ = 0` against the
/// `(1−2δ)/3` guarantee; budgeted mode runs density enumeration against
/// `max{k_a,1}/((2|L|+2)(1+3δ))`.
pub fn brute_check(mode: Mode, count: usize, master: u64, delta: f64) -> Result<Vec<BruteRow>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(master, "brute-check", i as u64);
            match mode {
                Mode::Uniform => {
                    let (obj, sys) = uniform_instance(&mut rng);
                    let (optimum, best) = brute_force_optimum(&obj, &sys)?;
                    let cfg = GreedyConfig::new(delta, 0.0)?.with_reference(best);
                    let r = greedy_fixed_density(&obj, &sys, &cfg)?;
                    let p = sys.matroid_count();
                    let blocking = r.blocking.as_deref().unwrap_or_default();
                    let blocking_holds = blocking
                        .iter()
                        .scan(0, |sum, c| {
                            *sum += c;
                            Some(*sum)
                        })
                        .enumerate()
                        .all(|(t, prefix)| prefix <= p * (t + 1));
                    Ok(row(i, &obj, optimum, r.value, (1.0 - 2.0 * delta) / 3.0, r.active_knapsacks, Some(blocking_holds)))
                }
                Mode::Budgeted => {
                    let (obj, sys) = budget_instance(&mut rng);
                    let (optimum, _) = brute_force_optimum(&obj, &sys)?;
                    let r = density_enumeration(&obj, &sys, delta)?;
                    let l = sys.products() as f64;
                    let bound = r.active_knapsacks.max(1) as f64 / ((2.0 * l + 2.0) * (1.0 + 3.0 * delta));
                    Ok(row(i, &obj, optimum, r.value, bound, r.active_knapsacks, None))
                }
            }
        })
        .collect()
}

fn row(
    instance: usize,
    obj: &budgetmax::Objective,
    optimum: f64,
    value: f64,
    bound: f64,
    active_knapsacks: usize,
    blocking_holds: Option<bool>,
) -> BruteRow {
    BruteRow {
        instance,
        products: obj.products(),
        users: obj.users(),
        optimum,
        value,
        ratio: if optimum > 0.0 { value / optimum } else { 1.0 },
        bound,
        holds: value >= bound * optimum,
        active_knapsacks,
        blocking_holds,
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}
