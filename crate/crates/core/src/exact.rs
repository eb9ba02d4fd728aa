//! Ground truth for small instances.
//!
//! Influence is exact in two cases: all delays deterministic (the cascade is a
//! single shortest-path computation) and a directed path with exponential
//! delays (the arrival time at the `m`-th node is a sum of `m` independent
//! exponentials). Optimal allocations come from exhaustive search over the
//! feasible sets of a ground set of at most [`ENUMERATION_BOUND`] elements.

use rayon::prelude::*;

use crate::constraints::{ConstraintState, ConstraintSystem, ENUMERATION_BOUND};
use crate::diffusion::{cascade_from_delays, DiffusionNetwork, TransmissionFunction};
use crate::error::{Error, Result};
use crate::objective::{GroundElement, Objective, ObjectiveState};

/// Rates closer than this are treated as equal.
pub const RATE_TOLERANCE: f64 = 1e-9;

/// Number of nodes reached within `horizon` when every delay is deterministic.
pub fn exact_influence_deterministic(net: &DiffusionNetwork, sources: &[usize], horizon: f64) -> Result<f64> {
    let delays = net
        .edges()
        .iter()
        .map(|e| match e.tf {
            TransmissionFunction::Deterministic { delay } => Ok(delay),
            other => Err(Error::InvalidNetwork(format!(
                "edge {} -> {} is not deterministic: {other:?}",
                e.src, e.dst
            ))),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(cascade_from_delays(net, sources, &delays, horizon)?.infected_count() as f64)
}

/// `P(S ≤ t)` for `S` a sum of independent exponentials with the given rates.
///
/// Equal rates use the Erlang formula and distinct rates the partial-fraction
/// form; mixtures of repeated and distinct rates fall back to uniformization.
pub fn hypoexponential_cdf(rates: &[f64], t: f64) -> Result<f64> {
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidTransmission(format!("exponential rate must be positive, got {r}")));
    }
    if rates.is_empty() {
        return Ok(if t >= 0.0 { 1.0 } else { 0.0 });
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let first = rates[0];
    if rates.iter().all(|r| (r - first).abs() <= RATE_TOLERANCE) {
        return Ok(erlang_cdf(rates.len(), first, t));
    }
    let distinct = rates
        .iter()
        .enumerate()
        .all(|(i, a)| rates[i + 1..].iter().all(|b| (a - b).abs() > RATE_TOLERANCE));
    if distinct {
        Ok(partial_fraction_cdf(rates, t))
    } else {
        Ok(uniformization_cdf(rates, t))
    }
}

/// Erlang CDF `1 − e^{−λt} Σ_{n<k} (λt)^n/n!`.
pub fn erlang_cdf(k: usize, rate: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let x = rate * t;
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 0..k {
        if n > 0 {
            term *= x / n as f64;
        }
        sum += term;
    }
    (1.0 - (-x).exp() * sum).clamp(0.0, 1.0)
}

fn partial_fraction_cdf(rates: &[f64], t: f64) -> f64 {
    let tail: f64 = rates
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let coeff: f64 = rates
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &lj)| lj / (lj - li))
                .product();
            coeff * (-li * t).exp()
        })
        .sum();
    (1.0 - tail).clamp(0.0, 1.0)
}

/// Absorption probability of the pure-birth chain `0 → 1 → … → m` by time
/// `t`, via uniformization at the largest rate.
pub fn uniformization_cdf(rates: &[f64], t: f64) -> f64 {
    let m = rates.len();
    if t <= 0.0 || m == 0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let lambda = rates.iter().copied().fold(0.0, f64::max);
    let x = lambda * t;
    let mut state = vec![0.0; m + 1];
    state[0] = 1.0;
    let mut weight = (-x).exp();
    let mut seen = weight;
    let mut cdf = weight * state[m];
    let mut n = 0usize;
    while seen < 1.0 - 1e-15 || (n as f64) < x {
        n += 1;
        for i in (0..m).rev() {
            let moved = state[i] * rates[i] / lambda;
            state[i + 1] += moved;
            state[i] -= moved;
        }
        weight *= x / n as f64;
        seen += weight;
        cdf += weight * state[m];
        if n > 100_000 {
            break;
        }
    }
    cdf.clamp(0.0, 1.0)
}

/// `1 + Σ_m P(S_m ≤ T)` for a path whose `m`-th edge has rate `rates[m-1]`,
/// seeded at the head.
pub fn exact_influence_exponential_path(rates: &[f64], horizon: f64) -> Result<f64> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidConfig(format!("horizon must be non-negative, got {horizon}")));
    }
    let mut total = 1.0;
    for m in 1..=rates.len() {
        total += hypoexponential_cdf(&rates[..m], horizon)?;
    }
    Ok(total)
}

/// Edge rates along a directed path network, head first. Rejects anything
/// that is not a single path covering all nodes with exponential edges.
pub fn path_rates(net: &DiffusionNetwork) -> Result<(usize, Vec<f64>)> {
    let n = net.node_count();
    let mut indeg = vec![0usize; n];
    for e in net.edges() {
        indeg[e.dst] += 1;
    }
    if net.edge_count() + 1 != n {
        return Err(Error::NotAPath(format!("{} edges on {n} nodes", net.edge_count())));
    }
    if (0..n).any(|v| net.out_degree(v) > 1 || indeg[v] > 1) {
        return Err(Error::NotAPath("a node branches or merges".into()));
    }
    let heads: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let [head] = heads[..] else {
        return Err(Error::NotAPath(format!("{} nodes without a parent", heads.len())));
    };
    let mut rates = Vec::with_capacity(n.saturating_sub(1));
    let mut at = head;
    while let Some(&id) = net.out_edge_ids(at).first() {
        let e = &net.edges()[id];
        match e.tf {
            TransmissionFunction::Exponential { rate } => rates.push(rate),
            other => {
                return Err(Error::NotAPath(format!("edge {} -> {} is not exponential: {other:?}", e.src, e.dst)))
            }
        }
        at = e.dst;
    }
    if rates.len() + 1 != n {
        return Err(Error::NotAPath("path does not reach every node".into()));
    }
    Ok((head, rates))
}

/// Exact influence of the head of an exponential path network.
pub fn exact_influence_path_network(net: &DiffusionNetwork, horizon: f64) -> Result<f64> {
    let (_, rates) = path_rates(net)?;
    exact_influence_exponential_path(&rates, horizon)
}

/// Best feasible set and its objective value, by exhaustive depth-first search
/// with constraint pruning. Ties keep the set found first in search order.
pub fn brute_force_optimum(objective: &Objective, constraints: &ConstraintSystem) -> Result<(f64, Vec<GroundElement>)> {
    let elements = constraints.ground().elements();
    if elements.len() > ENUMERATION_BOUND {
        return Err(Error::GroundSetTooLarge { size: elements.len(), bound: ENUMERATION_BOUND });
    }
    if objective.products() != constraints.products() || objective.users() != constraints.users() {
        return Err(Error::InvalidConfig("objective and constraints disagree on dimensions".into()));
    }
    let search = Search { objective, constraints, elements };
    let root_obj = objective.new_state();
    let root_cons = constraints.new_state();
    let branches: Vec<(f64, Vec<GroundElement>)> = (0..elements.len())
        .into_par_iter()
        .map(|first| {
            let mut best = (f64::NEG_INFINITY, Vec::new());
            let z = elements[first];
            if constraints.can_add(&root_cons, z).is_feasible() {
                let mut obj = root_obj.clone();
                let mut cons = root_cons.clone();
                search.descend(&mut obj, &mut cons, z);
                search.visit(first + 1, &obj, &cons, &mut best);
            }
            best
        })
        .collect();
    let mut best = (0.0, Vec::new());
    for branch in branches {
        if branch.0 > best.0 {
            best = branch;
        }
    }
    Ok(best)
}

struct Search<'a> {
    objective: &'a Objective,
    constraints: &'a ConstraintSystem,
    elements: &'a [GroundElement],
}

impl Search<'_> {
    fn descend(&self, obj: &mut ObjectiveState, cons: &mut ConstraintState, z: GroundElement) {
        self.constraints.add(cons, z).expect("checked feasible");
        self.objective.commit(obj, z);
    }

    fn visit(&self, from: usize, obj: &ObjectiveState, cons: &ConstraintState, best: &mut (f64, Vec<GroundElement>)) {
        let value = self.objective.value(obj);
        if value > best.0 {
            *best = (value, obj.selected().to_vec());
        }
        for i in from..self.elements.len() {
            let z = self.elements[i];
            if !self.constraints.can_add(cons, z).is_feasible() {
                continue;
            }
            let mut o = obj.clone();
            let mut c = cons.clone();
            self.descend(&mut o, &mut c, z);
            self.visit(i + 1, &o, &c, best);
        }
    }
}
