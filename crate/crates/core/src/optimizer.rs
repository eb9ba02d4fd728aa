//! Allocation algorithms: adaptive threshold greedy, density enumeration,
//! lazy greedy, and the degree and random baselines.
//!
//! Every algorithm walks the ground set in ascending `(product, user)` order
//! where an order is needed, so results are reproducible and ties go to the
//! lower index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintState, ConstraintSystem, Feasibility};
use crate::diffusion::DiffusionNetwork;
use crate::error::{Error, Result};
use crate::objective::{GroundElement, Objective, ObjectiveState};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Threshold decay `δ > 0`.
    pub delta: f64,
    /// Density threshold `ρ ≥ 0`.
    pub rho: f64,
    /// Skip elements whose last computed gain is already below the current
    /// gate. Gains only shrink as the solution grows, so the selected set is
    /// unchanged; only the evaluation count drops.
    pub reuse_bounds: bool,
    /// Reference solution for the blocking-partition trace.
    pub reference: Option<Vec<GroundElement>>,
}

impl GreedyConfig {
    pub fn new(delta: f64, rho: f64) -> Result<Self> {
        let cfg = GreedyConfig { delta, rho, reuse_bounds: true, reference: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("rho must be non-negative, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn with_reference(mut self, reference: Vec<GroundElement>) -> Self {
        self.reference = Some(reference);
        self
    }
}

/// One committed element with the values that admitted it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub element: GroundElement,
    pub gain: f64,
    /// Threshold in force, or `None` for algorithms without thresholds.
    pub threshold: Option<f64>,
    pub cost: f64,
}

/// Summary of one run of a fixed density inside density enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRun {
    pub rho: f64,
    pub value: f64,
    pub active_knapsacks: usize,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    /// Selected elements in commit order.
    pub solution: Vec<GroundElement>,
    pub value: f64,
    pub rho: Option<f64>,
    pub thresholds: Vec<f64>,
    /// Elements added at each threshold, aligned with `thresholds`.
    pub per_threshold: Vec<usize>,
    pub selections: Vec<Selection>,
    /// `k_a`: products whose budget blocked an otherwise admissible element.
    pub active_knapsacks: usize,
    /// Marginal-gain and singleton evaluations.
    pub evaluations: u64,
    pub elapsed_secs: f64,
    /// `|C_t|` per greedy step, when a reference solution was supplied.
    pub blocking: Option<Vec<usize>>,
    pub density_runs: Vec<DensityRun>,
}

impl RunReport {
    fn new(algorithm: &str) -> Self {
        RunReport {
            algorithm: algorithm.to_string(),
            solution: Vec::new(),
            value: 0.0,
            rho: None,
            thresholds: Vec::new(),
            per_threshold: Vec::new(),
            selections: Vec::new(),
            active_knapsacks: 0,
            evaluations: 0,
            elapsed_secs: 0.0,
            blocking: None,
            density_runs: Vec::new(),
        }
    }

    /// Solution sorted by `(product, user)`.
    pub fn sorted_solution(&self) -> Vec<GroundElement> {
        let mut s = self.solution.clone();
        s.sort();
        s
    }
}

fn check_dimensions(objective: &Objective, constraints: &ConstraintSystem) -> Result<()> {
    if objective.products() != constraints.products() || objective.users() != constraints.users() {
        return Err(Error::InvalidConfig(format!(
            "objective is {}x{} but constraints are {}x{}",
            objective.products(),
            objective.users(),
            constraints.products(),
            constraints.users()
        )));
    }
    Ok(())
}

/// Thresholds `w_t = d_ρ/(1+δ)^t` for `t = 0..=L`, where `L` is the first
/// index with `w_L ≤ δd/N`, followed by a final 0.
pub fn threshold_schedule(d_rho: f64, d: f64, n: usize, delta: f64) -> Vec<f64> {
    let floor = delta * d / n.max(1) as f64;
    let mut out = Vec::new();
    let mut t = 0;
    loop {
        let w = d_rho / (1.0 + delta).powi(t);
        out.push(w);
        if w <= floor {
            break;
        }
        t += 1;
    }
    out.push(0.0);
    out
}

/// Geometric density grid `2d/(P+2k+1)·(1+δ)^t`, keeping points up to the
/// endpoint `2|Z|d/(P+2k+1)`.
pub fn density_grid(d: f64, p: usize, k: usize, n: usize, delta: f64) -> Vec<f64> {
    let base = 2.0 * d / (p + 2 * k + 1) as f64;
    if base <= 0.0 {
        return vec![0.0];
    }
    let end = n as f64 * base;
    let mut out = Vec::new();
    let mut t = 0;
    loop {
        let rho = base * (1.0 + delta).powi(t);
        if rho > end * (1.0 + 1e-12) {
            break;
        }
        out.push(rho);
        t += 1;
    }
    out
}

/// Shared state for one greedy run: objective and constraint states moving
/// together, plus the report being filled in.
struct Run<'a> {
    objective: &'a Objective,
    constraints: &'a ConstraintSystem,
    obj: ObjectiveState,
    cons: ConstraintState,
    report: RunReport,
}

impl<'a> Run<'a> {
    fn new(objective: &'a Objective, constraints: &'a ConstraintSystem, algorithm: &str) -> Self {
        Run {
            objective,
            constraints,
            obj: objective.new_state(),
            cons: constraints.new_state(),
            report: RunReport::new(algorithm),
        }
    }

    fn gain(&mut self, z: GroundElement) -> f64 {
        self.report.evaluations += 1;
        self.objective.gain(&self.obj, z)
    }

    /// Adds `z` if feasible, marking budgets that block it.
    fn try_add(&mut self, z: GroundElement, gain: f64, threshold: Option<f64>) -> bool {
        let verdict = self.constraints.can_add(&self.cons, z);
        if verdict != Feasibility::Feasible {
            self.cons.note_blocked(verdict);
            return false;
        }
        self.commit(z, gain, threshold);
        true
    }

    fn commit(&mut self, z: GroundElement, gain: f64, threshold: Option<f64>) {
        self.constraints.add(&mut self.cons, z).expect("feasibility checked before commit");
        self.objective.commit(&mut self.obj, z);
        self.report.solution.push(z);
        self.report.selections.push(Selection { element: z, gain, threshold, cost: self.constraints.cost(z) });
    }

    fn finish(mut self, start: Instant) -> RunReport {
        self.report.value = self.objective.value(&self.obj);
        self.report.active_knapsacks = self.cons.active_knapsack_count();
        self.report.elapsed_secs = start.elapsed().as_secs_f64();
        self.report
    }
}

fn singletons(objective: &Objective, constraints: &ConstraintSystem) -> Vec<f64> {
    constraints.ground().elements().par_iter().map(|&z| objective.singleton(z)).collect()
}

/// Adaptive threshold greedy for a fixed density `ρ`.
pub fn greedy_fixed_density(
    objective: &Objective,
    constraints: &ConstraintSystem,
    config: &GreedyConfig,
) -> Result<RunReport> {
    config.validate()?;
    check_dimensions(objective, constraints)?;
    let start = Instant::now();
    let singles = singletons(objective, constraints);
    let d = singles.iter().copied().fold(0.0, f64::max);
    let mut report = fixed_density_with(objective, constraints, config, &singles, d, start);
    report.evaluations += singles.len() as u64;
    Ok(report)
}

fn fixed_density_with(
    objective: &Objective,
    constraints: &ConstraintSystem,
    config: &GreedyConfig,
    singles: &[f64],
    d: f64,
    start: Instant,
) -> RunReport {
    let elements = constraints.ground().elements();
    let rho = config.rho;
    let mut run = Run::new(objective, constraints, "budgetmax");
    run.report.rho = Some(rho);

    let d_rho = elements
        .iter()
        .zip(singles)
        .filter(|&(&z, &f)| f >= constraints.cost(z) * rho)
        .map(|(_, &f)| f)
        .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.max(f))));
    let Some(d_rho) = d_rho else {
        return run.finish(start);
    };

    let thresholds = threshold_schedule(d_rho, d, elements.len(), config.delta);
    let mut bound = singles.to_vec();
    let mut fresh_at = vec![0usize; elements.len()];
    // Elements blocked for good: selected, or infeasible (heredity keeps them so).
    let mut dead = vec![false; elements.len()];
    let mut per_threshold = Vec::with_capacity(thresholds.len());

    for &w in &thresholds {
        let mut added = 0;
        for (pos, &z) in elements.iter().enumerate() {
            if dead[pos] {
                continue;
            }
            let gate = w.max(constraints.cost(z) * rho);
            if config.reuse_bounds && bound[pos] < gate {
                continue;
            }
            if constraints.matroid_block(&run.cons, z).is_some() {
                dead[pos] = true;
                continue;
            }
            // A bound computed against the current G is the exact gain.
            let size = run.report.solution.len();
            let gain = if config.reuse_bounds && fresh_at[pos] == size {
                bound[pos]
            } else {
                run.gain(z)
            };
            bound[pos] = gain;
            fresh_at[pos] = size;
            if gain < constraints.cost(z) * rho || gain < w {
                continue;
            }
            dead[pos] = true;
            if run.try_add(z, gain, Some(w)) {
                added += 1;
            }
        }
        per_threshold.push(added);
    }
    run.report.thresholds = thresholds;
    run.report.per_threshold = per_threshold;
    if let Some(reference) = &config.reference {
        run.report.blocking = Some(blocking_trace(constraints, &run.report.solution, reference));
    }
    run.finish(start)
}

/// Best fixed-density run over the geometric density grid. Requires budgets.
pub fn density_enumeration(objective: &Objective, constraints: &ConstraintSystem, delta: f64) -> Result<RunReport> {
    let base = GreedyConfig::new(delta, 0.0)?;
    check_dimensions(objective, constraints)?;
    if constraints.knapsack().is_none() {
        return Err(Error::InvalidConfig("density enumeration needs knapsack budgets".into()));
    }
    let start = Instant::now();
    let singles = singletons(objective, constraints);
    let d = singles.iter().copied().fold(0.0, f64::max);
    let grid = density_grid(
        d,
        constraints.matroid_count(),
        constraints.knapsack_count(),
        constraints.ground().len(),
        delta,
    );
    let runs: Vec<RunReport> = grid
        .par_iter()
        .map(|&rho| {
            let cfg = GreedyConfig { rho, ..base.clone() };
            fixed_density_with(objective, constraints, &cfg, &singles, d, start)
        })
        .collect();

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let density_runs: Vec<DensityRun> = runs
        .iter()
        .map(|r| DensityRun {
            rho: r.rho.unwrap_or(0.0),
            value: r.value,
            active_knapsacks: r.active_knapsacks,
            evaluations: r.evaluations,
        })
        .collect();
    let evaluations = singles.len() as u64 + runs.iter().map(|r| r.evaluations).sum::<u64>();
    let mut report = runs.into_iter().nth(best).expect("grid is never empty");
    report.evaluations = evaluations;
    report.density_runs = density_runs;
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Adaptive threshold greedy with `ρ = 0`, the uniform-cost entry point.
pub fn uniform_cost_greedy(objective: &Objective, constraints: &ConstraintSystem, delta: f64) -> Result<RunReport> {
    greedy_fixed_density(objective, constraints, &GreedyConfig::new(delta, 0.0)?)
}

/// `|C_t|` for each prefix of `greedy`: elements of `reference` outside the
/// final greedy set that are feasible to add before step `t` and infeasible
/// after it.
pub fn blocking_trace(
    constraints: &ConstraintSystem,
    greedy: &[GroundElement],
    reference: &[GroundElement],
) -> Vec<usize> {
    let outside: Vec<GroundElement> = reference.iter().filter(|z| !greedy.contains(z)).copied().collect();
    let feasible_with = |prefix: &[GroundElement], z: GroundElement| {
        let mut s = prefix.to_vec();
        s.push(z);
        constraints.is_feasible(&s)
    };
    (1..=greedy.len())
        .map(|t| {
            outside
                .iter()
                .filter(|&&z| feasible_with(&greedy[..t - 1], z) && !feasible_with(&greedy[..t], z))
                .count()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    gain: f64,
    pos: usize,
    // Solution size when `gain` was computed.
    round: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.pos.cmp(&self.pos))
    }
}

/// Classic greedy with stale upper bounds in a max-heap. Each round commits
/// the feasible element of largest marginal gain; stops once no feasible
/// element has positive gain.
pub fn lazy_greedy(objective: &Objective, constraints: &ConstraintSystem) -> Result<RunReport> {
    check_dimensions(objective, constraints)?;
    let start = Instant::now();
    let elements = constraints.ground().elements();
    let singles = singletons(objective, constraints);
    let mut run = Run::new(objective, constraints, "lazy");
    run.report.evaluations = singles.len() as u64;
    let mut heap: BinaryHeap<HeapEntry> =
        singles.iter().enumerate().map(|(pos, &gain)| HeapEntry { gain, pos, round: 0 }).collect();

    while let Some(top) = heap.pop() {
        if top.gain <= 0.0 {
            break;
        }
        let z = elements[top.pos];
        let verdict = constraints.can_add(&run.cons, z);
        if verdict != Feasibility::Feasible {
            run.cons.note_blocked(verdict);
            continue;
        }
        let round = run.report.solution.len();
        if top.round == round {
            run.commit(z, top.gain, None);
        } else {
            let gain = run.gain(z);
            heap.push(HeapEntry { gain, pos: top.pos, round });
        }
    }
    Ok(run.finish(start))
}

fn check_networks(objective: &Objective, networks: &[DiffusionNetwork]) -> Result<()> {
    if networks.len() != objective.products() {
        return Err(Error::InvalidConfig(format!(
            "{} networks for {} products",
            networks.len(),
            objective.products()
        )));
    }
    let max = objective.candidates().iter().copied().max().unwrap_or(0);
    if let Some(net) = networks.iter().find(|n| n.node_count() <= max) {
        return Err(Error::InvalidConfig(format!(
            "network of product {} has {} nodes, candidate {max} is out of range",
            net.product(),
            net.node_count()
        )));
    }
    Ok(())
}

fn degree_key(
    objective: &Objective,
    networks: &[DiffusionNetwork],
    constraints: &ConstraintSystem,
    z: GroundElement,
    cost_ratio: bool,
) -> f64 {
    let degree = networks[z.product].out_degree(objective.candidates()[z.user]) as f64;
    if cost_ratio {
        degree / constraints.cost(z)
    } else {
        degree
    }
}

fn sort_by_key_desc(items: &mut [(f64, GroundElement)]) {
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
}

/// Adds pairs in descending out-degree order (degree over cost when
/// `cost_ratio`), skipping infeasible ones.
pub fn greedy_degree(
    objective: &Objective,
    networks: &[DiffusionNetwork],
    constraints: &ConstraintSystem,
    cost_ratio: bool,
) -> Result<RunReport> {
    check_dimensions(objective, constraints)?;
    check_networks(objective, networks)?;
    let start = Instant::now();
    let mut order: Vec<(f64, GroundElement)> = constraints
        .ground()
        .elements()
        .iter()
        .map(|&z| (degree_key(objective, networks, constraints, z, cost_ratio), z))
        .collect();
    sort_by_key_desc(&mut order);
    let mut run = Run::new(objective, constraints, "degree");
    for (_, z) in order {
        let gain = objective.gain(&run.obj, z);
        run.try_add(z, gain, None);
    }
    Ok(run.finish(start))
}

/// Degree-over-cost ordering inside each product, taking turns across
/// products; each turn adds that product's next feasible pair.
pub fn greedy_degree_local(
    objective: &Objective,
    networks: &[DiffusionNetwork],
    constraints: &ConstraintSystem,
) -> Result<RunReport> {
    check_dimensions(objective, constraints)?;
    check_networks(objective, networks)?;
    let start = Instant::now();
    let mut groups: Vec<Vec<(f64, GroundElement)>> = vec![Vec::new(); constraints.products()];
    for &z in constraints.ground().elements() {
        groups[z.product].push((degree_key(objective, networks, constraints, z, true), z));
    }
    for g in &mut groups {
        sort_by_key_desc(g);
    }
    let mut cursor = vec![0; groups.len()];
    let mut run = Run::new(objective, constraints, "degree-local");
    loop {
        let mut progressed = false;
        for (g, list) in groups.iter().enumerate() {
            while cursor[g] < list.len() {
                let z = list[cursor[g]].1;
                cursor[g] += 1;
                let gain = objective.gain(&run.obj, z);
                if run.try_add(z, gain, None) {
                    break;
                }
            }
            progressed |= cursor[g] < list.len();
        }
        if !progressed {
            break;
        }
    }
    Ok(run.finish(start))
}

/// Uniformly random order over the ground set, feasibility-checked.
pub fn random_allocation(objective: &Objective, constraints: &ConstraintSystem, seed: u64) -> Result<RunReport> {
    check_dimensions(objective, constraints)?;
    let start = Instant::now();
    let mut order = constraints.ground().elements().to_vec();
    order.shuffle(&mut seed::stream(seed, "random-allocation", 0));
    let mut run = Run::new(objective, constraints, "random");
    for z in order {
        let gain = objective.gain(&run.obj, z);
        run.try_add(z, gain, None);
    }
    Ok(run.finish(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::normalize_costs;
    use crate::diffusion::{Edge, TransmissionFunction};
    use crate::influence::{build_coverage_index, build_sample_bank};

    fn z(i: usize, j: usize) -> GroundElement {
        GroundElement::new(i, j)
    }

    fn det(src: usize, dst: usize) -> Edge {
        Edge { src, dst, tf: TransmissionFunction::Deterministic { delay: 1.0 } }
    }

    /// One product per edge list; candidates are nodes `0..users`.
    fn objective(node_count: usize, users: usize, products: Vec<Vec<Edge>>) -> (Objective, Vec<DiffusionNetwork>) {
        let candidates: Vec<usize> = (0..users).collect();
        let nets: Vec<DiffusionNetwork> = products
            .into_iter()
            .enumerate()
            .map(|(i, edges)| DiffusionNetwork::new(node_count, i, edges).unwrap())
            .collect();
        let indices = nets
            .iter()
            .map(|net| {
                let bank = build_sample_bank(net, 2, 7).unwrap();
                build_coverage_index(&bank, net, &candidates, 10.0).unwrap()
            })
            .collect();
        (Objective::new(indices).unwrap(), nets)
    }

    // Candidates 0, 1, 2 with disjoint reach sets of sizes 3, 2, 1.
    fn disjoint_321() -> Vec<Edge> {
        vec![det(0, 3), det(0, 4), det(1, 5)]
    }

    #[test]
    fn schedule_shape() {
        let w = threshold_schedule(8.0, 10.0, 5, 1.0);
        // Floor 2: 8, 4, 2, then 0.
        assert_eq!(w, vec![8.0, 4.0, 2.0, 0.0]);
        let w = threshold_schedule(0.0, 0.0, 5, 0.1);
        assert_eq!(w, vec![0.0, 0.0]);
    }

    #[test]
    fn grid_endpoints() {
        let g = density_grid(10.0, 1, 2, 6, 1.0);
        assert_eq!(g.len(), 3);
        for (got, want) in g.iter().zip([10.0 / 3.0, 20.0 / 3.0, 40.0 / 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(density_grid(0.0, 1, 1, 4, 0.5), vec![0.0]);
    }

    #[test]
    fn config_validation() {
        assert!(GreedyConfig::new(0.0, 0.0).is_err());
        assert!(GreedyConfig::new(0.1, -1.0).is_err());
        assert!(GreedyConfig::new(0.1, f64::NAN).is_err());
        assert!(GreedyConfig::new(0.1, 0.0).is_ok());
    }

    #[test]
    fn fixed_density_picks_top_two() {
        let (obj, _) = objective(6, 3, vec![disjoint_321()]);
        let sys = ConstraintSystem::uniform(vec![usize::MAX; 3], vec![2]).unwrap();
        let r = uniform_cost_greedy(&obj, &sys, 0.1).unwrap();
        assert_eq!(r.sorted_solution(), vec![z(0, 0), z(0, 1)]);
        assert_eq!(r.value, 5.0);
        assert_eq!(r.value, obj.value_of(&r.solution));
        assert_eq!(*r.thresholds.last().unwrap(), 0.0);
        assert_eq!(r.per_threshold.iter().sum::<usize>(), 2);
    }

    #[test]
    fn huge_rho_gives_empty_solution() {
        let (obj, _) = objective(6, 3, vec![disjoint_321()]);
        let sys = ConstraintSystem::uniform(vec![1; 3], vec![3]).unwrap();
        let r = greedy_fixed_density(&obj, &sys, &GreedyConfig::new(0.1, 100.0).unwrap()).unwrap();
        assert!(r.solution.is_empty());
        assert_eq!(r.value, 0.0);
        assert!(r.thresholds.is_empty());
    }

    #[test]
    fn tie_goes_to_lower_index() {
        // Candidates 0 and 1 both reach one extra node; product cap 1.
        let (obj, _) = objective(4, 2, vec![vec![det(0, 2), det(1, 3)]]);
        let sys = ConstraintSystem::uniform(vec![1, 1], vec![1]).unwrap();
        let r = uniform_cost_greedy(&obj, &sys, 0.01).unwrap();
        assert_eq!(r.solution, vec![z(0, 0)]);
    }

    #[test]
    fn zero_threshold_pass_leaves_solution_maximal() {
        let (obj, _) = objective(6, 3, vec![disjoint_321(), vec![det(2, 3)]]);
        let sys = ConstraintSystem::uniform(vec![1, 2, 1], vec![2, 2]).unwrap();
        let r = uniform_cost_greedy(&obj, &sys, 0.5).unwrap();
        let cons = {
            let mut st = sys.new_state();
            for &e in &r.solution {
                sys.add(&mut st, e).unwrap();
            }
            st
        };
        for &e in sys.ground().elements() {
            if !r.solution.contains(&e) {
                assert!(!sys.can_add(&cons, e).is_feasible(), "{e} could still be added");
            }
        }
    }

    #[test]
    fn bound_reuse_does_not_change_solution() {
        let (obj, _) = objective(8, 4, vec![vec![det(0, 4), det(1, 4), det(1, 5), det(2, 6), det(3, 6), det(3, 7)]; 2]);
        let sys = ConstraintSystem::uniform(vec![1, 2, 1, 2], vec![2, 3]).unwrap();
        for delta in [0.01, 0.3, 1.0] {
            let fast = GreedyConfig::new(delta, 0.0).unwrap();
            let slow = GreedyConfig { reuse_bounds: false, ..fast.clone() };
            let a = greedy_fixed_density(&obj, &sys, &fast).unwrap();
            let b = greedy_fixed_density(&obj, &sys, &slow).unwrap();
            assert_eq!(a.solution, b.solution);
            assert!(a.evaluations <= b.evaluations);
        }
    }

    #[test]
    fn selections_pass_both_gates() {
        let (obj, _) = objective(6, 3, vec![disjoint_321(), vec![det(2, 3), det(2, 4)]]);
        let k = normalize_costs(&[vec![0.6, 0.3, 0.2], vec![0.5, 0.5, 0.4]], &[1.0, 1.0]).unwrap();
        let sys = ConstraintSystem::budgeted(vec![1; 3], k).unwrap();
        let r = greedy_fixed_density(&obj, &sys, &GreedyConfig::new(0.2, 2.0).unwrap()).unwrap();
        for s in &r.selections {
            assert!(s.gain >= s.threshold.unwrap().max(s.cost * 2.0));
        }
        assert!(sys.is_feasible(&r.solution));
    }

    #[test]
    fn active_budget_marked() {
        // Product 0: candidate 0 (gain 3, cost 0.6), candidate 1 (gain 2, cost 0.6).
        let (obj, _) = objective(6, 2, vec![disjoint_321()]);
        let k = normalize_costs(&[vec![0.6, 0.6]], &[1.0]).unwrap();
        let sys = ConstraintSystem::budgeted(vec![1, 1], k).unwrap();
        let r = uniform_cost_greedy(&obj, &sys, 0.1).unwrap();
        assert_eq!(r.solution, vec![z(0, 0)]);
        assert_eq!(r.active_knapsacks, 1);
    }

    #[test]
    fn density_enumeration_needs_budgets() {
        let (obj, _) = objective(6, 3, vec![disjoint_321()]);
        let sys = ConstraintSystem::uniform(vec![1; 3], vec![2]).unwrap();
        assert!(density_enumeration(&obj, &sys, 0.1).is_err());
    }

    #[test]
    fn density_enumeration_dominates_each_run() {
        let (obj, _) = objective(6, 3, vec![disjoint_321(), vec![det(1, 3), det(2, 4)]]);
        let k = normalize_costs(&[vec![0.9, 0.2, 0.1], vec![0.3, 0.3, 0.6]], &[1.0, 1.0]).unwrap();
        let sys = ConstraintSystem::budgeted(vec![1; 3], k).unwrap();
        let r = density_enumeration(&obj, &sys, 0.5).unwrap();
        assert!(!r.density_runs.is_empty());
        for run in &r.density_runs {
            assert!(r.value >= run.value);
        }
        assert_eq!(r.value, obj.value_of(&r.solution));
        assert!(sys.is_feasible(&r.solution));
    }

    #[test]
    fn lazy_matches_threshold_greedy_on_modular_instance() {
        // Reach sizes 4, 2, 1 are more than a factor 1.01 apart.
        let edges = vec![det(0, 3), det(0, 4), det(0, 5), det(1, 6)];
        let (obj, _) = objective(7, 3, vec![edges.clone(), edges]);
        let sys = ConstraintSystem::uniform(vec![1, 1, 1], vec![2, 2]).unwrap();
        let a = lazy_greedy(&obj, &sys).unwrap();
        let b = uniform_cost_greedy(&obj, &sys, 0.01).unwrap();
        assert_eq!(a.sorted_solution(), b.sorted_solution());
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn lazy_stops_at_zero_gain() {
        // Candidate 1 is covered by candidate 0, so its gain drops to zero.
        let (obj, _) = objective(2, 2, vec![vec![det(0, 1)]]);
        let sys = ConstraintSystem::uniform(vec![1; 2], vec![2]).unwrap();
        let r = lazy_greedy(&obj, &sys).unwrap();
        assert_eq!(r.solution, vec![z(0, 0)]);
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn degree_examples() {
        // Star centre 0 with 3 leaves versus leaf 1; one slot.
        let (obj, nets) = objective(4, 2, vec![vec![det(0, 1), det(0, 2), det(0, 3)]]);
        let sys = ConstraintSystem::uniform(vec![1, 1], vec![1]).unwrap();
        assert_eq!(greedy_degree(&obj, &nets, &sys, false).unwrap().solution, vec![z(0, 0)]);

        // Degree 4 at cost 1.0 against degree 3 at cost 0.5.
        let edges = vec![det(0, 2), det(0, 3), det(0, 4), det(0, 5), det(1, 6), det(1, 7), det(1, 8)];
        let (obj, nets) = objective(9, 2, vec![edges]);
        let k = normalize_costs(&[vec![1.0, 0.5]], &[1.0]).unwrap();
        let sys = ConstraintSystem::budgeted(vec![1, 1], k).unwrap();
        let r = greedy_degree(&obj, &nets, &sys, true).unwrap();
        assert_eq!(r.solution[0], z(0, 1));

        // Every other user has zero capacity.
        let (obj, nets) = objective(4, 3, vec![vec![det(0, 3)], vec![det(1, 3)]]);
        let sys = ConstraintSystem::uniform(vec![1, 0, 0], vec![3, 3]).unwrap();
        assert_eq!(greedy_degree(&obj, &nets, &sys, false).unwrap().solution.len(), 1);
    }

    #[test]
    fn degree_local_alternates_products() {
        let (obj, nets) = objective(6, 3, vec![disjoint_321(), disjoint_321()]);
        let sys = ConstraintSystem::uniform(vec![2; 3], vec![2, 2]).unwrap();
        let r = greedy_degree_local(&obj, &nets, &sys).unwrap();
        assert_eq!(r.solution, vec![z(0, 0), z(1, 0), z(0, 1), z(1, 1)]);
    }

    #[test]
    fn random_allocation_is_feasible_and_seeded() {
        let (obj, _) = objective(6, 3, vec![disjoint_321(), disjoint_321()]);
        let sys = ConstraintSystem::uniform(vec![1; 3], vec![2, 2]).unwrap();
        let a = random_allocation(&obj, &sys, 9).unwrap();
        let b = random_allocation(&obj, &sys, 9).unwrap();
        assert_eq!(a.solution, b.solution);
        assert!(sys.is_feasible(&a.solution));
    }

    #[test]
    fn blocking_trace_counts_newly_blocked() {
        // One user slot; reference picks product 1 for user 0.
        let sys = ConstraintSystem::uniform(vec![1, 1], vec![1, 1]).unwrap();
        let trace = blocking_trace(&sys, &[z(0, 0), z(1, 1)], &[z(1, 0), z(0, 1)]);
        assert_eq!(trace, vec![2, 0]);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let (obj, _) = objective(6, 3, vec![disjoint_321()]);
        let sys = ConstraintSystem::uniform(vec![1; 2], vec![2]).unwrap();
        assert!(uniform_cost_greedy(&obj, &sys, 0.1).is_err());
        assert!(lazy_greedy(&obj, &sys).is_err());
    }
}
