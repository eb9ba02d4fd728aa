//! Matroid and group-knapsack constraints over the assignment ground set.
//!
//! Every matroid here is a capacity family: a set of element blocks, each with
//! a capacity, where `S` is independent iff `|S ∩ B| ≤ cap(B)` for every
//! block. Partition matroids use disjoint blocks (per user column or per
//! product row); laminar matroids allow nested blocks, such as a community
//! tree over users.
//!
//! Knapsack budgets apply per product row. Costs are normalized by the row
//! budget so each row has unit budget, and elements whose normalized cost
//! exceeds 1 leave the ground set.
//!
//! All algorithms grow solutions monotonically, so the interface is
//! incremental: [`ConstraintSystem::can_add`] answers against a
//! [`ConstraintState`], [`ConstraintSystem::add`] commits. A from-scratch
//! checker ([`ConstraintSystem::is_feasible`]) exists for tests and oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::GroundElement;

/// Slack allowed when comparing accumulated knapsack spend against the unit
/// budget.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Hard size bound for exhaustive enumeration of feasible sets.
pub const ENUMERATION_BOUND: usize = 24;

/// The active ground set: a subset of `products × users` in ascending
/// (product, user) order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSet {
    products: usize,
    users: usize,
    elements: Vec<GroundElement>,
    member: Vec<bool>,
}

impl GroundSet {
    pub fn full(products: usize, users: usize) -> Self {
        let elements = (0..products)
            .flat_map(|i| (0..users).map(move |j| GroundElement::new(i, j)))
            .collect();
        GroundSet { products, users, elements, member: vec![true; products * users] }
    }

    fn filtered(products: usize, users: usize, keep: impl Fn(GroundElement) -> bool) -> Self {
        let mut g = GroundSet::full(products, users);
        g.elements.retain(|&z| keep(z));
        g.member.iter_mut().for_each(|m| *m = false);
        for i in 0..g.elements.len() {
            let d = g.dense(g.elements[i]);
            g.member[d] = true;
        }
        g
    }

    pub fn products(&self) -> usize {
        self.products
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn elements(&self) -> &[GroundElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dense(&self, z: GroundElement) -> usize {
        z.product * self.users + z.user
    }

    pub fn in_grid(&self, z: GroundElement) -> bool {
        z.product < self.products && z.user < self.users
    }

    pub fn contains(&self, z: GroundElement) -> bool {
        self.in_grid(z) && self.member[self.dense(z)]
    }

    /// Products that keep at least one element.
    pub fn nonempty_products(&self) -> usize {
        let mut seen = vec![false; self.products];
        for z in &self.elements {
            seen[z.product] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }
}

/// Partition matroid: disjoint blocks covering the grid, one capacity each.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatroid {
    users: usize,
    block_of: Vec<usize>,
    capacity: Vec<usize>,
}

impl PartitionMatroid {
    /// Blocks given per grid cell in dense `(product, user)` order.
    pub fn new(products: usize, users: usize, block_of: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        if block_of.len() != products * users {
            return Err(Error::InvalidConstraint(format!(
                "partition assigns {} cells, grid has {}",
                block_of.len(),
                products * users
            )));
        }
        if let Some(&b) = block_of.iter().find(|&&b| b >= capacity.len()) {
            return Err(Error::InvalidConstraint(format!("block {b} has no capacity")));
        }
        Ok(PartitionMatroid { users, block_of, capacity })
    }

    /// User constraint: column `j` holds at most `caps[j]` products.
    pub fn per_user(products: usize, caps: Vec<usize>) -> Result<Self> {
        let users = caps.len();
        let block_of = (0..products).flat_map(|_| 0..users).collect();
        PartitionMatroid::new(products, users, block_of, caps)
    }

    /// Product constraint under uniform cost: row `i` holds at most `caps[i]` users.
    pub fn per_product(users: usize, caps: Vec<usize>) -> Result<Self> {
        let products = caps.len();
        let block_of = (0..products).flat_map(|i| std::iter::repeat_n(i, users)).collect();
        PartitionMatroid::new(products, users, block_of, caps)
    }

    pub fn block_count(&self) -> usize {
        self.capacity.len()
    }

    pub fn capacity(&self, block: usize) -> usize {
        self.capacity[block]
    }

    fn blocks_of(&self, d: usize) -> &[usize] {
        std::slice::from_ref(&self.block_of[d])
    }

    pub fn block_of(&self, z: GroundElement) -> usize {
        self.block_of[z.product * self.users + z.user]
    }
}

/// Uniform-cost row capacity `⌊B / c⌋`.
pub fn uniform_capacity(cost: f64, budget: f64) -> Result<usize> {
    if !(cost > 0.0 && cost.is_finite()) || !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidCost(format!("cost {cost} and budget {budget} must be positive")));
    }
    Ok((budget / cost + BUDGET_TOLERANCE).floor() as usize)
}

/// Laminar matroid: blocks pairwise nested or disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminarMatroid {
    capacity: Vec<usize>,
    // Blocks containing each grid cell.
    membership: Vec<Vec<usize>>,
}

impl LaminarMatroid {
    /// Builds from explicit element groups, rejecting families with two
    /// properly intersecting groups.
    pub fn new(products: usize, users: usize, groups: Vec<(Vec<GroundElement>, usize)>) -> Result<Self> {
        let cells = products * users;
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
        for (members, _) in &groups {
            let mut dense = Vec::with_capacity(members.len());
            for z in members {
                if z.product >= products || z.user >= users {
                    return Err(Error::InvalidConstraint(format!("group element {z} outside the grid")));
                }
                dense.push(z.product * users + z.user);
            }
            dense.sort_unstable();
            dense.dedup();
            sets.push(dense);
        }
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let common = intersection_len(&sets[a], &sets[b]);
                let nested = common == sets[a].len() || common == sets[b].len();
                if common > 0 && !nested {
                    return Err(Error::InvalidConstraint(format!(
                        "groups {a} and {b} intersect without nesting"
                    )));
                }
            }
        }
        let mut membership = vec![Vec::new(); cells];
        for (g, set) in sets.iter().enumerate() {
            for &d in set {
                membership[d].push(g);
            }
        }
        Ok(LaminarMatroid { capacity: groups.into_iter().map(|(_, c)| c).collect(), membership })
    }

    /// Community limits over users: each group of users admits at most `cap`
    /// assignments across all products.
    pub fn user_communities(products: usize, users: usize, groups: Vec<(Vec<usize>, usize)>) -> Result<Self> {
        let groups = groups
            .into_iter()
            .map(|(members, cap)| {
                let elems = (0..products)
                    .flat_map(|i| members.iter().map(move |&j| GroundElement::new(i, j)))
                    .collect();
                (elems, cap)
            })
            .collect();
        LaminarMatroid::new(products, users, groups)
    }

    pub fn block_count(&self) -> usize {
        self.capacity.len()
    }

    pub fn capacity(&self, block: usize) -> usize {
        self.capacity[block]
    }

    fn blocks_of(&self, d: usize) -> &[usize] {
        &self.membership[d]
    }
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matroid {
    Partition(PartitionMatroid),
    Laminar(LaminarMatroid),
}

impl Matroid {
    pub fn block_count(&self) -> usize {
        match self {
            Matroid::Partition(m) => m.block_count(),
            Matroid::Laminar(m) => m.block_count(),
        }
    }

    pub fn capacity(&self, block: usize) -> usize {
        match self {
            Matroid::Partition(m) => m.capacity(block),
            Matroid::Laminar(m) => m.capacity(block),
        }
    }

    fn blocks_of(&self, d: usize) -> &[usize] {
        match self {
            Matroid::Partition(m) => m.blocks_of(d),
            Matroid::Laminar(m) => m.blocks_of(d),
        }
    }

    fn cells(&self) -> usize {
        match self {
            Matroid::Partition(m) => m.block_of.len(),
            Matroid::Laminar(m) => m.membership.len(),
        }
    }
}

impl From<PartitionMatroid> for Matroid {
    fn from(m: PartitionMatroid) -> Self {
        Matroid::Partition(m)
    }
}

impl From<LaminarMatroid> for Matroid {
    fn from(m: LaminarMatroid) -> Self {
        Matroid::Laminar(m)
    }
}

/// Normalized per-element costs with one unit budget per product row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupKnapsack {
    products: usize,
    users: usize,
    // Normalized cost per grid cell; None when dropped for exceeding the budget.
    cost: Vec<Option<f64>>,
}

impl GroupKnapsack {
    pub fn products(&self) -> usize {
        self.products
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Normalized cost, or `None` if the element was dropped.
    pub fn cost(&self, z: GroundElement) -> Option<f64> {
        self.cost[z.product * self.users + z.user]
    }
}

/// Divides each raw cost `c_ij` by its product budget `B_i` and drops elements
/// whose normalized cost exceeds 1. `raw[i][j]` is the cost of assigning
/// product `i` to user `j`.
pub fn normalize_costs(raw: &[Vec<f64>], budgets: &[f64]) -> Result<GroupKnapsack> {
    if raw.len() != budgets.len() {
        return Err(Error::InvalidCost(format!("{} cost rows for {} budgets", raw.len(), budgets.len())));
    }
    let users = raw.first().map_or(0, Vec::len);
    let mut cost = Vec::with_capacity(raw.len() * users);
    for (i, (row, &budget)) in raw.iter().zip(budgets).enumerate() {
        if row.len() != users {
            return Err(Error::InvalidCost(format!("cost row {i} has {} users, expected {users}", row.len())));
        }
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::InvalidCost(format!("budget of product {i} must be positive, got {budget}")));
        }
        for (j, &c) in row.iter().enumerate() {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidCost(format!("cost ({i}, {j}) must be positive, got {c}")));
            }
            let normalized = c / budget;
            cost.push((normalized <= 1.0).then_some(normalized));
        }
    }
    Ok(GroupKnapsack { products: raw.len(), users, cost })
}

/// Outcome of an incremental feasibility query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// Index of the first matroid whose capacity would be exceeded.
    BlockedByMatroid(usize),
    /// Product whose budget would be exceeded.
    BlockedByKnapsack(usize),
}

impl Feasibility {
    pub fn is_feasible(self) -> bool {
        self == Feasibility::Feasible
    }
}

/// Intersection of `P ≥ 1` matroids plus optional group-knapsack budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    ground: GroundSet,
    matroids: Vec<Matroid>,
    knapsack: Option<GroupKnapsack>,
}

impl ConstraintSystem {
    pub fn new(
        products: usize,
        users: usize,
        matroids: Vec<Matroid>,
        knapsack: Option<GroupKnapsack>,
    ) -> Result<Self> {
        if matroids.is_empty() {
            return Err(Error::InvalidConstraint("at least one matroid is required".into()));
        }
        if let Some(m) = matroids.iter().find(|m| m.cells() != products * users) {
            return Err(Error::InvalidConstraint(format!(
                "matroid covers {} cells, grid has {}",
                m.cells(),
                products * users
            )));
        }
        let ground = match &knapsack {
            Some(k) => {
                if k.products != products || k.users != users {
                    return Err(Error::InvalidConstraint(format!(
                        "knapsack is {}x{}, grid is {products}x{users}",
                        k.products, k.users
                    )));
                }
                GroundSet::filtered(products, users, |z| k.cost(z).is_some())
            }
            None => GroundSet::full(products, users),
        };
        Ok(ConstraintSystem { ground, matroids, knapsack })
    }

    /// User matroid plus uniform-cost product matroid (`P = 2`, `k = 0`).
    pub fn uniform(user_caps: Vec<usize>, product_caps: Vec<usize>) -> Result<Self> {
        let (products, users) = (product_caps.len(), user_caps.len());
        let m1 = PartitionMatroid::per_user(products, user_caps)?;
        let m2 = PartitionMatroid::per_product(users, product_caps)?;
        ConstraintSystem::new(products, users, vec![m1.into(), m2.into()], None)
    }

    /// User matroid plus per-product budgets (`P = 1`, `k = |L|`).
    pub fn budgeted(user_caps: Vec<usize>, knapsack: GroupKnapsack) -> Result<Self> {
        let (products, users) = (knapsack.products(), user_caps.len());
        let m1 = PartitionMatroid::per_user(products, user_caps)?;
        ConstraintSystem::new(products, users, vec![m1.into()], Some(knapsack))
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn products(&self) -> usize {
        self.ground.products
    }

    pub fn users(&self) -> usize {
        self.ground.users
    }

    pub fn matroids(&self) -> &[Matroid] {
        &self.matroids
    }

    pub fn knapsack(&self) -> Option<&GroupKnapsack> {
        self.knapsack.as_ref()
    }

    /// Number of matroids `P`.
    pub fn matroid_count(&self) -> usize {
        self.matroids.len()
    }

    /// Number of knapsack groups `k`: products that keep at least one element,
    /// or 0 without budgets.
    pub fn knapsack_count(&self) -> usize {
        if self.knapsack.is_some() {
            self.ground.nonempty_products()
        } else {
            0
        }
    }

    /// Normalized cost `c(z)`; unit cost when the system has no budgets.
    pub fn cost(&self, z: GroundElement) -> f64 {
        match &self.knapsack {
            Some(k) => k.cost(z).unwrap_or(f64::INFINITY),
            None => 1.0,
        }
    }

    pub fn new_state(&self) -> ConstraintState {
        ConstraintState {
            selected: vec![false; self.products() * self.users()],
            members: Vec::new(),
            counts: self.matroids.iter().map(|m| vec![0; m.block_count()]).collect(),
            spend: vec![0.0; self.products()],
            active: vec![false; self.products()],
        }
    }

    /// First matroid that `z` would overflow, if any.
    pub fn matroid_block(&self, state: &ConstraintState, z: GroundElement) -> Option<usize> {
        let d = self.ground.dense(z);
        self.matroids.iter().enumerate().find_map(|(p, m)| {
            m.blocks_of(d).iter().any(|&b| state.counts[p][b] >= m.capacity(b)).then_some(p)
        })
    }

    /// Whether `z` fits its product's remaining budget.
    pub fn fits_budget(&self, state: &ConstraintState, z: GroundElement) -> bool {
        match &self.knapsack {
            Some(k) => match k.cost(z) {
                Some(c) => state.spend[z.product] + c <= 1.0 + BUDGET_TOLERANCE,
                None => false,
            },
            None => true,
        }
    }

    /// Feasibility of adding `z` (assumed not yet selected). Matroids are
    /// checked before budgets. Does not modify `state`; see
    /// [`ConstraintState::note_blocked`] for active-budget accounting.
    pub fn can_add(&self, state: &ConstraintState, z: GroundElement) -> Feasibility {
        if let Some(p) = self.matroid_block(state, z) {
            return Feasibility::BlockedByMatroid(p);
        }
        if !self.fits_budget(state, z) {
            return Feasibility::BlockedByKnapsack(z.product);
        }
        Feasibility::Feasible
    }

    /// Commits `z`, failing without side effects when it is infeasible.
    pub fn add(&self, state: &mut ConstraintState, z: GroundElement) -> Result<()> {
        if !self.ground.contains(z) {
            return Err(Error::InvalidConstraint(format!("{z} is not in the ground set")));
        }
        let d = self.ground.dense(z);
        if state.selected[d] {
            return Err(Error::InvalidConstraint(format!("{z} is already selected")));
        }
        match self.can_add(state, z) {
            Feasibility::Feasible => {}
            blocked => return Err(Error::InvalidConstraint(format!("{z} is infeasible: {blocked:?}"))),
        }
        for (p, m) in self.matroids.iter().enumerate() {
            for &b in m.blocks_of(d) {
                state.counts[p][b] += 1;
            }
        }
        state.spend[z.product] += self.knapsack.as_ref().and_then(|k| k.cost(z)).unwrap_or(0.0);
        state.selected[d] = true;
        state.members.push(z);
        Ok(())
    }

    // Inverse of `add` for backtracking enumeration.
    fn remove_last(&self, state: &mut ConstraintState) {
        let z = state.members.pop().expect("non-empty state");
        let d = self.ground.dense(z);
        for (p, m) in self.matroids.iter().enumerate() {
            for &b in m.blocks_of(d) {
                state.counts[p][b] -= 1;
            }
        }
        state.selected[d] = false;
        if let Some(k) = &self.knapsack {
            // Recompute instead of subtracting to avoid drift.
            state.spend[z.product] = state
                .members
                .iter()
                .filter(|m| m.product == z.product)
                .filter_map(|&m| k.cost(m))
                .sum();
        }
    }

    /// Matroid-only independence of an arbitrary set, from scratch.
    pub fn is_matroid_independent(&self, set: &[GroundElement]) -> bool {
        let mut counts: Vec<Vec<usize>> = self.matroids.iter().map(|m| vec![0; m.block_count()]).collect();
        let mut seen = std::collections::HashSet::new();
        for &z in set {
            if !self.ground.in_grid(z) || !seen.insert(z) {
                return false;
            }
            let d = self.ground.dense(z);
            for (p, m) in self.matroids.iter().enumerate() {
                for &b in m.blocks_of(d) {
                    counts[p][b] += 1;
                    if counts[p][b] > m.capacity(b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Full feasibility of an arbitrary set, from scratch.
    pub fn is_feasible(&self, set: &[GroundElement]) -> bool {
        if !set.iter().all(|&z| self.ground.contains(z)) || !self.is_matroid_independent(set) {
            return false;
        }
        match &self.knapsack {
            None => true,
            Some(k) => {
                let mut spend = vec![0.0; self.products()];
                for &z in set {
                    spend[z.product] += k.cost(z).unwrap_or(f64::INFINITY);
                }
                spend.iter().all(|&s| s <= 1.0 + BUDGET_TOLERANCE)
            }
        }
    }

    /// Iterates every feasible subset of the ground set, including the empty
    /// set, in depth-first order over ascending ground-set indices. Rejects
    /// ground sets larger than [`ENUMERATION_BOUND`].
    pub fn enumerate_feasible(&self) -> Result<FeasibleSets<'_>> {
        if self.ground.len() > ENUMERATION_BOUND {
            return Err(Error::GroundSetTooLarge { size: self.ground.len(), bound: ENUMERATION_BOUND });
        }
        Ok(FeasibleSets { system: self, state: self.new_state(), chosen: Vec::new(), next: 0, started: false })
    }
}

/// Incremental constraint state: selected elements, per-block counts,
/// per-product spend and active-budget flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintState {
    selected: Vec<bool>,
    members: Vec<GroundElement>,
    counts: Vec<Vec<usize>>,
    spend: Vec<f64>,
    active: Vec<bool>,
}

impl ConstraintState {
    pub fn members(&self) -> &[GroundElement] {
        &self.members
    }

    pub fn spend(&self, product: usize) -> f64 {
        self.spend[product]
    }

    /// Records a blocked attempt; a budget block marks its product active.
    pub fn note_blocked(&mut self, verdict: Feasibility) {
        if let Feasibility::BlockedByKnapsack(i) = verdict {
            self.active[i] = true;
        }
    }

    pub fn is_active(&self, product: usize) -> bool {
        self.active[product]
    }

    /// `k_a`: products whose budget blocked an attempted addition.
    pub fn active_knapsack_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Clears selections, counters and active flags.
    pub fn reset(&mut self) {
        self.selected.iter_mut().for_each(|s| *s = false);
        self.members.clear();
        self.counts.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v = 0));
        self.spend.iter_mut().for_each(|s| *s = 0.0);
        self.active.iter_mut().for_each(|a| *a = false);
    }
}

/// Depth-first iterator over feasible sets; see
/// [`ConstraintSystem::enumerate_feasible`].
pub struct FeasibleSets<'a> {
    system: &'a ConstraintSystem,
    state: ConstraintState,
    chosen: Vec<usize>,
    next: usize,
    started: bool,
}

impl Iterator for FeasibleSets<'_> {
    type Item = Vec<GroundElement>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            return Some(Vec::new());
        }
        let elements = self.system.ground.elements();
        loop {
            while self.next < elements.len() {
                let i = self.next;
                self.next += 1;
                if self.system.can_add(&self.state, elements[i]).is_feasible() {
                    self.system.add(&mut self.state, elements[i]).expect("checked feasible");
                    self.chosen.push(i);
                    return Some(self.state.members.clone());
                }
            }
            // Heredity: no extension from here, so backtrack.
            let last = self.chosen.pop()?;
            self.system.remove_last(&mut self.state);
            self.next = last + 1;
        }
    }
}
