mod common;

use affine_games::bsde::{node_problems_hold, solve_reflected_bsde, solve_reflected_bsde_permuted};
use affine_games::matrices::{gen_k_matrix, DEFAULT_TOL};
use affine_games::multi_period::{backward_induction, evaluate_profile};
use affine_games::tree::AdaptedProcess;
use affine_games::ScenarioTree;
use common::{max_diff, rng, uniform_vec};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn k_tree(seed: u64, m: usize, horizon: usize, branching: usize, time_dependent: bool) -> ScenarioTree {
    let mut tree = ScenarioTree::random(seed, m, horizon, branching, Some(gen_k_matrix(seed, m, false)));
    if time_dependent {
        for n in 0..tree.len() {
            if !tree.is_leaf(n) {
                tree.set_node_matrix(n, Some(gen_k_matrix(seed.wrapping_add(n as u64 + 1), m, false)));
            }
        }
    }
    tree
}

/// `E[leaf values | n]` summed over root-to-leaf path probabilities.
fn path_expectation(tree: &ScenarioTree, leaf_values: &AdaptedProcess, n: usize) -> Vec<f64> {
    if tree.is_leaf(n) {
        return leaf_values.at(n).to_vec();
    }
    let mut acc = vec![0.0; tree.players()];
    let mut stack = vec![(n, 1.0)];
    while let Some((k, w)) = stack.pop() {
        if tree.is_leaf(k) {
            acc.iter_mut().zip(leaf_values.at(k)).for_each(|(a, v)| *a += w * v);
        } else {
            stack.extend(tree.children(k).iter().map(|&c| (c, w * tree.node(c).p)));
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tower_property(seed in any::<u64>(), m in 1usize..4, horizon in 1usize..5, branching in 1usize..4) {
        let tree = ScenarioTree::random(seed, m, horizon, branching, None);
        let mut r = rng(seed);
        let leaves = AdaptedProcess { values: (0..tree.len()).map(|_| uniform_vec(&mut r, m, -5.0, 5.0)).collect() };
        let full = AdaptedProcess { values: (0..tree.len()).map(|n| path_expectation(&tree, &leaves, n)).collect() };
        for n in (0..tree.len()).filter(|&n| !tree.is_leaf(n)) {
            let step = tree.conditional_expectation(&full, n).unwrap();
            prop_assert!(max_diff(&step, full.at(n)) <= 1e-12);
        }
    }

    #[test]
    fn expectation_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let tree = ScenarioTree::random(seed, 2, 3, 3, None);
        let mut r = rng(seed);
        let f = AdaptedProcess { values: (0..tree.len()).map(|_| uniform_vec(&mut r, 2, -5.0, 5.0)).collect() };
        let g = AdaptedProcess { values: (0..tree.len()).map(|_| uniform_vec(&mut r, 2, -5.0, 5.0)).collect() };
        let h = AdaptedProcess {
            values: f.values.iter().zip(&g.values)
                .map(|(x, y)| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
                .collect(),
        };
        for n in (0..tree.len()).filter(|&n| !tree.is_leaf(n)) {
            let ef = tree.conditional_expectation(&f, n).unwrap();
            let eg = tree.conditional_expectation(&g, n).unwrap();
            let combo: Vec<f64> = ef.iter().zip(&eg).map(|(u, v)| a * u + b * v).collect();
            prop_assert!(max_diff(&combo, &tree.conditional_expectation(&h, n).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn value_process_invariants(seed in any::<u64>(), m in 1usize..4, horizon in 1usize..4, time_dependent in any::<bool>()) {
        let tree = k_tree(seed, m, horizon, 2, time_dependent);
        let vp = backward_induction(&tree, DEFAULT_TOL).unwrap();
        for n in 0..tree.len() {
            let u = vp.u.at(n);
            let x = tree.payoff(n);
            prop_assert!(u.iter().zip(x).all(|(a, b)| *a >= b - 1e-12));
            if tree.is_leaf(n) {
                prop_assert_eq!(u, x);
                continue;
            }
            if vp.tau_star.stops.iter().all(|s| !s[n]) {
                let cont = tree.conditional_expectation(&vp.u, n).unwrap();
                prop_assert!(max_diff(u, &cont) <= 1e-9);
            }
            let ev = evaluate_profile(&tree, &vp, &vp.tau_star, n, DEFAULT_TOL).unwrap();
            prop_assert!(max_diff(&ev, u) <= 1e-9);
        }
    }

    #[test]
    fn bsde_is_order_independent(seed in any::<u64>(), m in 1usize..4, horizon in 1usize..4, time_dependent in any::<bool>()) {
        let tree = k_tree(seed, m, horizon, 2, time_dependent);
        let base = solve_reflected_bsde(&tree, DEFAULT_TOL).unwrap();
        let mut order: Vec<usize> = (0..tree.len()).collect();
        order.shuffle(&mut rng(seed));
        let other = solve_reflected_bsde_permuted(&tree, &order, DEFAULT_TOL).unwrap();
        for n in 0..tree.len() {
            prop_assert!(max_diff(base.z.at(n), other.z.at(n)) <= 1e-12);
            prop_assert!(max_diff(base.k.at(n), other.k.at(n)) <= 1e-12);
        }
        prop_assert!(node_problems_hold(&tree, &base, DEFAULT_TOL).unwrap());
    }
}
