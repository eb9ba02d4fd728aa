//! Small random instances for comparisons against brute force.

use budgetmax::constraints::normalize_costs;
use budgetmax::diffusion::Edge;
use budgetmax::influence::{build_coverage_index, build_sample_bank};
use budgetmax::seed::Rng;
use budgetmax::{ConstraintSystem, DiffusionNetwork, Objective, TransmissionFunction};
use rand::Rng as _;

/// Sparse network with a mix of exponential and Weibull edges.
pub fn random_network(rng: &mut Rng, nodes: usize, product: usize, edge_prob: f64) -> DiffusionNetwork {
    let mut edges = Vec::new();
    for src in 0..nodes {
        for dst in 0..nodes {
            if src != dst && rng.random::<f64>() < edge_prob {
                let tf = if rng.random::<bool>() {
                    TransmissionFunction::Exponential { rate: rng.random_range(0.3..3.0) }
                } else {
                    TransmissionFunction::Weibull { shape: rng.random_range(0.5..4.0), scale: rng.random_range(0.3..3.0) }
                };
                edges.push(Edge { src, dst, tf });
            }
        }
    }
    DiffusionNetwork::new(nodes, product, edges).expect("generated edges are valid")
}

/// Weighted objective over random networks, candidates `0..users`.
pub fn random_objective(rng: &mut Rng, products: usize, users: usize, nodes: usize, samples: usize) -> Objective {
    let candidates: Vec<usize> = (0..users).collect();
    let horizon = rng.random_range(0.5..3.0);
    let indices = (0..products)
        .map(|i| {
            let net = random_network(rng, nodes, i, 2.0 / nodes as f64);
            let bank = build_sample_bank(&net, samples, rng.random()).expect("samples > 0");
            build_coverage_index(&bank, &net, &candidates, horizon).expect("valid candidates")
        })
        .collect();
    let weights = (0..products).map(|_| rng.random_range(0.5..2.0)).collect();
    Objective::weighted(indices, weights).expect("valid weights")
}

/// Uniform cost: `|L| ∈ {2,3}`, `|V_S| ∈ {4,6}`, `u_j, b_i ∈ {1,2}`.
pub fn uniform_instance(rng: &mut Rng) -> (Objective, ConstraintSystem) {
    let products = rng.random_range(2..=3);
    let users = [4, 6][rng.random_range(0..2)];
    let obj = random_objective(rng, products, users, 12, 32);
    let user_caps = (0..users).map(|_| rng.random_range(1..=2)).collect();
    let product_caps = (0..products).map(|_| rng.random_range(1..=2)).collect();
    (obj, ConstraintSystem::uniform(user_caps, product_caps).expect("consistent sizes"))
}

/// General cost: normalized costs in `(0, 1]`, `|Z| ≤ 20`, `u_j ∈ {1,2}`.
pub fn budget_instance(rng: &mut Rng) -> (Objective, ConstraintSystem) {
    let products = rng.random_range(2..=3);
    let users = rng.random_range(3..=20 / products);
    let obj = random_objective(rng, products, users, 12, 32);
    let raw: Vec<Vec<f64>> =
        (0..products).map(|_| (0..users).map(|_| 1.0 - rng.random::<f64>()).collect()).collect();
    let knapsack = normalize_costs(&raw, &vec![1.0; products]).expect("positive costs");
    let user_caps = (0..users).map(|_| rng.random_range(1..=2)).collect();
    (obj, ConstraintSystem::budgeted(user_caps, knapsack).expect("consistent sizes"))
}
