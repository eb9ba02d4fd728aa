mod common;

use budgetmax::constraints::{normalize_costs, LaminarMatroid, Matroid, PartitionMatroid};
use budgetmax::exact::brute_force_optimum;
use budgetmax::optimizer::{
    density_enumeration, greedy_fixed_density, lazy_greedy, uniform_cost_greedy, GreedyConfig,
};
use budgetmax::{seed, ConstraintSystem, Objective};
use rand::Rng;

fn uniform_instance(rng: &mut seed::Rng) -> (Objective, ConstraintSystem) {
    let products = rng.random_range(2..=3);
    let users = [4, 6][rng.random_range(0..2)];
    let obj = common::random_objective(rng, products, users, 12, 32);
    let user_caps = (0..users).map(|_| rng.random_range(1..=2)).collect();
    let product_caps = (0..products).map(|_| rng.random_range(1..=2)).collect();
    (obj, ConstraintSystem::uniform(user_caps, product_caps).unwrap())
}

fn budget_instance(rng: &mut seed::Rng) -> (Objective, ConstraintSystem) {
    let products = rng.random_range(2..=3);
    let users = rng.random_range(3..=20 / products);
    let obj = common::random_objective(rng, products, users, 12, 32);
    let raw: Vec<Vec<f64>> = (0..products).map(|_| (0..users).map(|_| rng.random_range(0.05..1.0)).collect()).collect();
    let knapsack = normalize_costs(&raw, &vec![1.0; products]).unwrap();
    let user_caps = (0..users).map(|_| rng.random_range(1..=2)).collect();
    (obj, ConstraintSystem::budgeted(user_caps, knapsack).unwrap())
}

#[test]
fn uniform_cost_bound_and_blocking_trace() {
    let mut rng = seed::rng(11);
    let delta = 0.01;
    for case in 0..40 {
        let (obj, sys) = uniform_instance(&mut rng);
        let (opt, best) = brute_force_optimum(&obj, &sys).unwrap();
        let cfg = GreedyConfig::new(delta, 0.0).unwrap().with_reference(best);
        let r = greedy_fixed_density(&obj, &sys, &cfg).unwrap();
        assert!(sys.is_feasible(&r.solution));
        assert_eq!(r.value, obj.value_of(&r.solution));
        assert!(r.value >= (1.0 - 2.0 * delta) / 3.0 * opt, "case {case}: {} vs OPT {opt}", r.value);
        let mut prefix = 0;
        for (t, c) in r.blocking.unwrap().iter().enumerate() {
            prefix += c;
            assert!(prefix <= 2 * (t + 1), "case {case}: prefix {prefix} at step {}", t + 1);
        }
    }
}

#[test]
fn general_cost_bound() {
    let mut rng = seed::rng(12);
    let delta = 0.1;
    for case in 0..30 {
        let (obj, sys) = budget_instance(&mut rng);
        let (opt, _) = brute_force_optimum(&obj, &sys).unwrap();
        let r = density_enumeration(&obj, &sys, delta).unwrap();
        assert!(sys.is_feasible(&r.solution));
        let l = sys.products() as f64;
        let factor = r.active_knapsacks.max(1) as f64 / ((2.0 * l + 2.0) * (1.0 + 3.0 * delta));
        assert!(r.value >= factor * opt, "case {case}: {} vs {factor} * {opt}", r.value);
    }
}

#[test]
fn matroid_stacks_bound() {
    let mut rng = seed::rng(13);
    let delta = 0.05;
    for case in 0..45 {
        let p = 1 + case % 3;
        let products = 2;
        let users = rng.random_range(3..=6);
        let obj = common::random_objective(&mut rng, products, users, 12, 32);
        let mut matroids: Vec<Matroid> =
            vec![PartitionMatroid::per_user(products, (0..users).map(|_| rng.random_range(1..=2)).collect()).unwrap().into()];
        if p >= 2 {
            matroids.push(PartitionMatroid::per_product(users, vec![rng.random_range(1..=3); products]).unwrap().into());
        }
        if p >= 3 {
            let half = users / 2;
            let groups = vec![((0..half).collect(), rng.random_range(1..=2)), ((half..users).collect(), rng.random_range(1..=3))];
            matroids.push(LaminarMatroid::user_communities(products, users, groups).unwrap().into());
        }
        let sys = ConstraintSystem::new(products, users, matroids, None).unwrap();
        let (opt, _) = brute_force_optimum(&obj, &sys).unwrap();
        let r = uniform_cost_greedy(&obj, &sys, delta).unwrap();
        assert!(r.value >= opt / ((1.0 + 2.0 * delta) * (p as f64 + 1.0)), "case {case} with P = {p}");
    }
}

#[test]
fn brute_force_dominates_all_algorithms() {
    let mut rng = seed::rng(14);
    for _ in 0..20 {
        let (obj, sys) = uniform_instance(&mut rng);
        let (opt, set) = brute_force_optimum(&obj, &sys).unwrap();
        assert_eq!(obj.value_of(&set), opt);
        // Independent oracle: filter every feasible set from the enumerator.
        let best = sys.enumerate_feasible().unwrap().map(|s| obj.value_of(&s)).fold(0.0, f64::max);
        assert_eq!(opt, best);
        assert!(uniform_cost_greedy(&obj, &sys, 0.3).unwrap().value <= opt);
        assert!(lazy_greedy(&obj, &sys).unwrap().value <= opt);
    }
}

// Per instance this fails on a minority of 20-element inputs, where CELF's
// stale bounds beat a coarse schedule; the totals still favour thresholds.
#[test]
fn lazy_greedy_evaluations_exceed_coarse_thresholds() {
    let mut rng = seed::rng(15);
    let (mut lazy_total, mut fast_total, mut wins) = (0, 0, 0);
    for _ in 0..20 {
        let products = 2;
        let users = 10;
        let obj = common::random_objective(&mut rng, products, users, 16, 32);
        let sys = ConstraintSystem::uniform(vec![2; users], vec![5; products]).unwrap();
        let lazy = lazy_greedy(&obj, &sys).unwrap();
        let fast = uniform_cost_greedy(&obj, &sys, 0.5).unwrap();
        lazy_total += lazy.evaluations;
        fast_total += fast.evaluations;
        wins += usize::from(lazy.evaluations >= fast.evaluations);
    }
    assert!(lazy_total >= fast_total, "{lazy_total} < {fast_total}");
    assert!(wins >= 14, "lazy used fewer evaluations on {} of 20", 20 - wins);
}

#[test]
fn runs_are_deterministic() {
    let mut rng = seed::rng(16);
    let (obj, sys) = budget_instance(&mut rng);
    let mut a = density_enumeration(&obj, &sys, 0.2).unwrap();
    let mut b = density_enumeration(&obj, &sys, 0.2).unwrap();
    a.elapsed_secs = 0.0;
    b.elapsed_secs = 0.0;
    assert_eq!(a, b);
}

// Fails on roughly one (instance, δ) pair in eight: greedy is not optimal, so a
// threshold run can land on a better set. Run with --ignored to see them.
#[test]
#[ignore = "not a per-instance property"]
fn lazy_greedy_value_dominates_threshold_greedy() {
    let mut rng = seed::rng(21);
    for case in 0..30 {
        let obj = common::random_objective(&mut rng, 3, 8, 16, 32);
        let sys = ConstraintSystem::uniform(vec![1; 8], vec![3; 3]).unwrap();
        let lazy = lazy_greedy(&obj, &sys).unwrap().value;
        for d in [0.01, 0.1, 0.5, 1.0] {
            let fast = uniform_cost_greedy(&obj, &sys, d).unwrap().value;
            assert!(lazy >= fast, "case {case}, delta {d}: {lazy} < {fast}");
        }
    }
}
