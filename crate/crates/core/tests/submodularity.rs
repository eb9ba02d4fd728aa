mod common;

use budgetmax::seed;
use budgetmax::GroundElement;
use proptest::prelude::*;

fn elements(products: usize, users: usize) -> Vec<GroundElement> {
    (0..products).flat_map(|i| (0..users).map(move |j| GroundElement::new(i, j))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diminishing_returns_and_monotonicity(
        seed in any::<u64>(),
        masks in prop::collection::vec((any::<u32>(), any::<u32>()), 1..8),
    ) {
        let mut rng = seed::rng(seed);
        let obj = common::random_objective(&mut rng, 2, 5, 14, 24);
        let all = elements(2, 5);
        prop_assert_eq!(obj.value(&obj.new_state()), 0.0);
        for (a_mask, extra) in masks {
            let a: Vec<_> = all.iter().enumerate().filter(|(k, _)| a_mask >> k & 1 == 1).map(|(_, &z)| z).collect();
            let b: Vec<_> = all.iter().enumerate().filter(|(k, _)| (a_mask | extra) >> k & 1 == 1).map(|(_, &z)| z).collect();
            let sa = obj.state_of(&a);
            let sb = obj.state_of(&b);
            prop_assert!(obj.value(&sa) <= obj.value(&sb));
            for &z in &all {
                prop_assert!(obj.gain(&sa, z) >= obj.gain(&sb, z), "diminishing returns broken at {}", z);
                prop_assert!(obj.gain(&sb, z) >= 0.0);
            }
        }
    }

    #[test]
    fn incremental_value_matches_batch(seed in any::<u64>(), order in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let mut rng = seed::rng(seed);
        let obj = common::random_objective(&mut rng, 3, 4, 12, 16);
        let all = elements(3, 4);
        let mut state = obj.new_state();
        let mut prefix = Vec::new();
        for &k in &order {
            let z = all[k];
            let before = obj.value(&state);
            let gain = obj.gain(&state, z);
            obj.commit(&mut state, z);
            prefix.push(z);
            prop_assert!((obj.value(&state) - (before + gain)).abs() <= 1e-9 * (1.0 + before));
            prop_assert_eq!(obj.value(&state), obj.value_of(&prefix));
        }
    }
}
