//! Overall influence over the ground set of (product, user) assignments.
//!
//! `f(S) = Σ_i a_i σ̂_i(R_i)` where `R_i` collects the users assigned product
//! `i` in `S`. Each term only depends on its own product's selections, so a
//! marginal gain touches exactly one per-product coverage state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{CoverageIndex, CoverageState};

/// An entry `(product, user)` of the assignment matrix. `user` indexes the
/// candidate list shared by all products. Ordering is by product, then user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundElement {
    pub product: usize,
    pub user: usize,
}

impl GroundElement {
    pub const fn new(product: usize, user: usize) -> Self {
        GroundElement { product, user }
    }
}

impl fmt::Display for GroundElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.product, self.user)
    }
}

/// Weighted per-product coverage indices sharing one candidate list.
#[derive(Debug, Clone)]
pub struct Objective {
    weights: Vec<f64>,
    indices: Vec<CoverageIndex>,
}

impl Objective {
    /// Unit weights.
    pub fn new(indices: Vec<CoverageIndex>) -> Result<Self> {
        let weights = vec![1.0; indices.len()];
        Objective::weighted(indices, weights)
    }

    pub fn weighted(indices: Vec<CoverageIndex>, weights: Vec<f64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidConfig("objective needs at least one product".into()));
        }
        if weights.len() != indices.len() {
            return Err(Error::InvalidConfig(format!(
                "{} weights for {} products",
                weights.len(),
                indices.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidConfig(format!("product weights must be positive, got {w}")));
        }
        let users = indices[0].candidates();
        if let Some(bad) = indices.iter().find(|idx| idx.candidates() != users) {
            return Err(Error::InvalidConfig(format!(
                "product {} uses a different candidate list",
                bad.product()
            )));
        }
        Ok(Objective { weights, indices })
    }

    pub fn products(&self) -> usize {
        self.indices.len()
    }

    /// Size of the shared candidate list.
    pub fn users(&self) -> usize {
        self.indices[0].candidate_count()
    }

    /// Candidate node ids; `user` positions index this list.
    pub fn candidates(&self) -> &[usize] {
        self.indices[0].candidates()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, product: usize) -> &CoverageIndex {
        &self.indices[product]
    }

    pub fn indices(&self) -> &[CoverageIndex] {
        &self.indices
    }

    fn dense(&self, z: GroundElement) -> usize {
        z.product * self.users() + z.user
    }

    pub fn new_state(&self) -> ObjectiveState {
        ObjectiveState {
            users: self.users(),
            selected: vec![false; self.products() * self.users()],
            order: Vec::new(),
            coverage: self.indices.iter().map(CoverageIndex::new_state).collect(),
        }
    }

    /// `f̂(S)` recomputed from the per-product covered totals.
    pub fn value(&self, state: &ObjectiveState) -> f64 {
        self.indices
            .iter()
            .zip(&self.weights)
            .zip(&state.coverage)
            .map(|((idx, &a), cov)| a * idx.count_to_value(cov.covered_total()))
            .sum()
    }

    /// `f̂(z | S)`; zero if `z` is already selected.
    pub fn gain(&self, state: &ObjectiveState, z: GroundElement) -> f64 {
        if state.contains_dense(self.dense(z)) {
            return 0.0;
        }
        let idx = &self.indices[z.product];
        self.weights[z.product] * idx.marginal_gain(&state.coverage[z.product], z.user)
    }

    /// `f̂({z})`.
    pub fn singleton(&self, z: GroundElement) -> f64 {
        let idx = &self.indices[z.product];
        let count: u64 = (0..idx.samples()).map(|s| idx.reach(s, z.user).len() as u64).sum();
        self.weights[z.product] * idx.count_to_value(count)
    }

    /// Adds `z` to the state. Re-adding is a no-op.
    pub fn commit(&self, state: &mut ObjectiveState, z: GroundElement) {
        let d = self.dense(z);
        if state.selected[d] {
            return;
        }
        state.selected[d] = true;
        state.order.push(z);
        self.indices[z.product].commit(&mut state.coverage[z.product], z.user);
    }

    /// `f̂(S)` for an arbitrary set, computed without any incremental state.
    pub fn value_of(&self, set: &[GroundElement]) -> f64 {
        let mut per_product: Vec<Vec<usize>> = vec![Vec::new(); self.products()];
        for z in set {
            if !per_product[z.product].contains(&z.user) {
                per_product[z.product].push(z.user);
            }
        }
        per_product
            .iter()
            .enumerate()
            .map(|(i, users)| {
                let idx = &self.indices[i];
                self.weights[i] * idx.count_to_value(idx.coverage_count(users))
            })
            .sum()
    }

    /// State holding exactly `set`, committed in order.
    pub fn state_of(&self, set: &[GroundElement]) -> ObjectiveState {
        let mut state = self.new_state();
        for &z in set {
            self.commit(&mut state, z);
        }
        state
    }
}

/// The selected set together with per-product coverage states.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveState {
    users: usize,
    selected: Vec<bool>,
    order: Vec<GroundElement>,
    coverage: Vec<CoverageState>,
}

impl ObjectiveState {
    fn contains_dense(&self, d: usize) -> bool {
        self.selected[d]
    }

    pub fn contains(&self, z: GroundElement) -> bool {
        self.selected[z.product * self.users + z.user]
    }

    /// Selected elements in commit order.
    pub fn selected(&self) -> &[GroundElement] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Users assigned `product`, as candidate positions.
    pub fn sources(&self, product: usize) -> &[usize] {
        self.coverage[product].sources()
    }

    pub fn coverage(&self, product: usize) -> &CoverageState {
        &self.coverage[product]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{DiffusionNetwork, Edge, TransmissionFunction};
    use crate::influence::{build_coverage_index, build_sample_bank};

    fn det(src: usize, dst: usize) -> Edge {
        Edge { src, dst, tf: TransmissionFunction::Deterministic { delay: 1.0 } }
    }

    // Product 0: path 0 -> 1 (reach of 0 is 2). Product 1: path 0 -> 1 -> 2 (reach 3).
    fn two_products(weights: Vec<f64>) -> Objective {
        let nets = [
            DiffusionNetwork::new(3, 0, vec![det(0, 1)]).unwrap(),
            DiffusionNetwork::new(3, 1, vec![det(0, 1), det(1, 2)]).unwrap(),
        ];
        let indices = nets
            .iter()
            .map(|net| {
                let bank = build_sample_bank(net, 4, 1).unwrap();
                build_coverage_index(&bank, net, &[0, 1], 5.0).unwrap()
            })
            .collect();
        Objective::weighted(indices, weights).unwrap()
    }

    #[test]
    fn value_examples() {
        let obj = two_products(vec![1.0, 1.0]);
        let empty = obj.new_state();
        assert_eq!(obj.value(&empty), 0.0);
        let s = obj.state_of(&[GroundElement::new(0, 0), GroundElement::new(1, 0)]);
        assert_eq!(obj.value(&s), 5.0);

        let obj = two_products(vec![2.0, 1.0]);
        let s = obj.state_of(&[GroundElement::new(0, 0), GroundElement::new(1, 0)]);
        assert_eq!(obj.value(&s), 7.0);
    }

    #[test]
    fn gain_examples() {
        let obj = two_products(vec![1.0, 1.0]);
        let mut s = obj.new_state();
        assert_eq!(obj.gain(&s, GroundElement::new(0, 0)), 2.0);
        obj.commit(&mut s, GroundElement::new(0, 0));
        assert_eq!(obj.gain(&s, GroundElement::new(0, 1)), 0.0);
        assert_eq!(obj.gain(&s, GroundElement::new(0, 0)), 0.0);
        // Product 1 is untouched by product 0's selections.
        assert_eq!(obj.gain(&s, GroundElement::new(1, 1)), 2.0);
    }

    #[test]
    fn singleton_matches_gain_on_empty_state() {
        let obj = two_products(vec![1.5, 0.5]);
        let empty = obj.new_state();
        for product in 0..2 {
            for user in 0..2 {
                let z = GroundElement::new(product, user);
                assert_eq!(obj.singleton(z), obj.gain(&empty, z));
            }
        }
    }

    #[test]
    fn invalid_weights_rejected() {
        let nets = DiffusionNetwork::new(2, 0, vec![det(0, 1)]).unwrap();
        let bank = build_sample_bank(&nets, 2, 1).unwrap();
        let idx = build_coverage_index(&bank, &nets, &[0], 1.0).unwrap();
        assert!(Objective::weighted(vec![idx.clone()], vec![0.0]).is_err());
        assert!(Objective::weighted(vec![idx.clone()], vec![1.0, 1.0]).is_err());
        assert!(Objective::new(vec![]).is_err());
        let other = build_coverage_index(&bank, &nets, &[1], 1.0).unwrap();
        assert!(Objective::new(vec![idx, other]).is_err());
    }
}
