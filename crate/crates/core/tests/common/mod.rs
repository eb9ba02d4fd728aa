#![allow(dead_code)]

use budgetmax::diffusion::Edge;
use budgetmax::influence::{build_coverage_index, build_sample_bank};
use budgetmax::seed::Rng;
use budgetmax::{DiffusionNetwork, Objective, TransmissionFunction};
use rand::Rng as _;

/// Random sparse network with exponential and Weibull edges.
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
    DiffusionNetwork::new(nodes, product, edges).unwrap()
}

/// Objective over `products` random networks, candidates `0..users`.
pub fn random_objective(rng: &mut Rng, products: usize, users: usize, nodes: usize, samples: usize) -> Objective {
    let candidates: Vec<usize> = (0..users).collect();
    let horizon = rng.random_range(0.5..3.0);
    let indices = (0..products)
        .map(|i| {
            let net = random_network(rng, nodes, i, 2.0 / nodes as f64);
            let bank = build_sample_bank(&net, samples, rng.random()).unwrap();
            build_coverage_index(&bank, &net, &candidates, horizon).unwrap()
        })
        .collect();
    let weights = (0..products).map(|_| rng.random_range(0.5..2.0)).collect();
    Objective::weighted(indices, weights).unwrap()
}
