//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use affine_games::bsde::{solve_reflected_bsde, verify_bsde_solution};
use affine_games::lcp::{solvability_p0prime, verify_solution, LcpProblem, P0Solvability};
use affine_games::matrices::{classify, gen_k_matrix, gen_p_matrix, schur_reduce};
use affine_games::multi_period::{
    backward_induction, evaluate_profile, naive_counterexample, nash_search,
    verify_optimal_equilibrium, StoppingGame, ENUMERATION_BUDGET,
};
use affine_games::redistribution::{dhat_from_alpha, grg_payoff, RedistributionSpec};
use affine_games::single_period::{
    coalition_value, enumerate_nash, is_optimal_equilibrium, payoff, projection_sol, sol, value,
    wuc_check,
};
use affine_games::{GameSpec, ScenarioTree, SquareMatrix, StrategyProfile};
use common::{alpha_with_sum, dot, max_diff, rng, singular_k0prime, uniform_vec};
use rand::Rng;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, || {
        format!("runtime {:.2}s exceeds {limit_s}s", elapsed.as_secs_f64())
    })
}

fn all_profiles(m: usize) -> impl Iterator<Item = StrategyProfile> {
    (0..1u32 << m).map(move |bits| StrategyProfile {
        s: (0..m).map(|i| ((bits >> i) & 1) as u8).collect(),
    })
}

fn p_matrix_equilibria() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for seed in 0..500u64 {
        let m = 2 + (seed % 5) as usize;
        let spec = GameSpec::random_payoffs(10_000 + seed, gen_p_matrix(seed, m)).map_err(|e| e.to_string())?;
        let v = sol(&spec, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        let nash = enumerate_nash(&spec, TOL).map_err(|e| e.to_string())?;
        check(!nash.is_empty(), || format!("seed {seed}: no Nash profile"))?;
        for s in &nash {
            let pay = payoff(&spec, s, TOL).map_err(|e| e.to_string())?.v;
            let d = max_diff(&pay, &v);
            worst = worst.max(d);
            check(d <= 1e-9, || format!("seed {seed}: Nash payoff off sol by {d:e}"))?;
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("500 games, max deviation {worst:.1e}, {:.2}s", start.elapsed().as_secs_f64()))
}

fn k_matrix_wuc_value() -> Outcome {
    let start = Instant::now();
    for seed in 0..200u64 {
        let m = 2 + (seed % 4) as usize;
        let spec = GameSpec::random_payoffs(20_000 + seed, gen_k_matrix(seed, m, false)).map_err(|e| e.to_string())?;
        check(wuc_check(&spec, TOL).map_err(|e| e.to_string())?, || format!("seed {seed}: WUC fails"))?;
        for s in enumerate_nash(&spec, TOL).map_err(|e| e.to_string())? {
            check(is_optimal_equilibrium(&spec, &s, TOL).map_err(|e| e.to_string())?, || {
                format!("seed {seed}: Nash profile {:?} is not optimal", s.s)
            })?;
        }
        let v = sol(&spec, TOL).map_err(|e| e.to_string())?;
        let val = value(&spec, TOL)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("seed {seed}: value does not exist"))?;
        let d = max_diff(&val, &v);
        check(d <= 1e-9, || format!("seed {seed}: value off sol by {d:e}"))?;
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("200 games, {:.2}s", start.elapsed().as_secs_f64()))
}

fn projection_equivalence() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..200u64 {
        let m = 2 + (seed % 5) as usize;
        let spec = GameSpec::random_payoffs(30_000 + seed, gen_p_matrix(500 + seed, m)).map_err(|e| e.to_string())?;
        let a = projection_sol(&spec, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        let b = sol(&spec, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        let d = max_diff(&a, &b);
        worst = worst.max(d);
        check(d <= 1e-7, || format!("seed {seed}: projection differs by {d:e}"))?;
    }
    Ok(format!("200 instances, max deviation {worst:.1e}"))
}

fn schur_preservation() -> Outcome {
    let mut pivots = 0;
    for seed in 0..500u64 {
        let m = 2 + (seed % 7) as usize;
        let g = gen_k_matrix(40_000 + seed, m, false);
        for i in 0..m {
            let r = schur_reduce(&g, i, TOL).map_err(|e| format!("seed {seed} pivot {i}: {e}"))?;
            let c = classify(&r, TOL).map_err(|e| e.to_string())?;
            check(c.is_k, || format!("seed {seed} pivot {i}: reduced matrix is not K"))?;
            pivots += 1;
        }
    }
    Ok(format!("500 matrices, {pivots} pivots"))
}

fn singular_dichotomy() -> Outcome {
    let (mut solvable, mut unsolvable) = (0, 0);
    for seed in 0..300u64 {
        let mut r = rng(50_000 + seed);
        let m = 2 + (seed % 4) as usize;
        let (g, v) = match seed % 3 {
            0 => (dhat_from_alpha(&alpha_with_sum(&mut r, m, 1.0)).unwrap(), vec![1.0; m]),
            1 => singular_k0prime(&mut r, m, false),
            _ => singular_k0prime(&mut r, m, true),
        };
        let x = uniform_vec(&mut r, m, -5.0, 5.0);
        let mut p = uniform_vec(&mut r, m, -5.0, 5.0);
        if seed % 10 == 9 {
            // Push q onto the boundary vᵀq = 0.
            let q: Vec<f64> = p.iter().zip(&x).map(|(a, b)| a - b).collect();
            let shift = dot(&v, &q) / dot(&v, &v);
            p.iter_mut().zip(&v).for_each(|(a, b)| *a -= shift * b);
        }
        let q: Vec<f64> = p.iter().zip(&x).map(|(a, b)| a - b).collect();
        let problem = LcpProblem::new(q.clone(), g.clone()).unwrap();
        let vq = dot(&v, &q);
        let scale = TOL * (1.0 + q.iter().fold(0.0_f64, |a, b| a.max(b.abs()))) * v.iter().sum::<f64>();
        match solvability_p0prime(&problem, TOL).map_err(|e| format!("seed {seed}: {e}"))? {
            P0Solvability::Solvable(s) => {
                check(vq >= -scale, || format!("seed {seed}: solvable but vᵀq = {vq:e}"))?;
                check(verify_solution(&problem, &s, TOL), || format!("seed {seed}: bad solution"))?;
                solvable += 1;
            }
            P0Solvability::Unsolvable(_) => {
                check(vq < scale, || format!("seed {seed}: unsolvable but vᵀq = {vq:e}"))?;
                let spec = GameSpec::new(x, p, g).unwrap();
                let nash = enumerate_nash(&spec, TOL).map_err(|e| e.to_string())?;
                check(nash.iter().any(|s| s.s.iter().all(|&b| b == 0)), || {
                    format!("seed {seed}: all-exercise profile is not Nash")
                })?;
                unsolvable += 1;
            }
        }
    }
    check(solvable > 0 && unsolvable > 0, || "one branch never exercised".into())?;
    Ok(format!("300 instances, {solvable} solvable, {unsolvable} unsolvable"))
}

fn coalition_additivity() -> Outcome {
    let mut coalitions = 0;
    for seed in 0..100u64 {
        let mut r = rng(60_000 + seed);
        let m = 2 + (seed % 3) as usize;
        let g = match seed % 4 {
            0 => gen_k_matrix(seed, m, true),
            1 => singular_k0prime(&mut r, m, false).0,
            2 => dhat_from_alpha(&alpha_with_sum(&mut r, m, 0.8)).unwrap(),
            _ => dhat_from_alpha(&alpha_with_sum(&mut r, m, 1.0)).unwrap(),
        };
        let spec = GameSpec::random_payoffs(61_000 + seed, g).map_err(|e| e.to_string())?;
        let v = sol(&spec, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        for bits in 1..1u32 << m {
            let a: Vec<usize> = (0..m).filter(|i| bits & (1 << i) != 0).collect();
            let cv = coalition_value(&spec, &a, TOL)
                .map_err(|e| format!("seed {seed}: {e}"))?
                .ok_or_else(|| format!("seed {seed}: coalition {a:?} has no value"))?;
            let expect: f64 = a.iter().map(|&i| v[i]).sum();
            check((cv - expect).abs() <= 1e-8, || {
                format!("seed {seed}: coalition {a:?} value {cv} vs {expect}")
            })?;
            coalitions += 1;
        }
    }
    Ok(format!("100 games, {coalitions} coalitions"))
}

fn appendix_equivalence() -> Outcome {
    for seed in 0..200u64 {
        let mut r = rng(70_000 + seed);
        let m = 1 + (seed % 5) as usize;
        let total = r.gen_range(0.05..=0.95);
        let alpha = alpha_with_sum(&mut r, m, total);
        let spec_r = RedistributionSpec::new(alpha.clone()).unwrap();
        let dhat = spec_r.dhat();
        let closed = spec_r.det_closed_form();
        let rel = (dhat.determinant() - closed).abs() / closed.abs();
        check(rel <= 1e-9, || format!("seed {seed}: determinant relative error {rel:e}"))?;
        let x = uniform_vec(&mut r, m, -5.0, 5.0);
        let p = uniform_vec(&mut r, m, -5.0, 5.0);
        let spec = GameSpec::new(x.clone(), p.clone(), dhat).unwrap();
        for s in all_profiles(m) {
            let a = grg_payoff(&x, &p, &alpha, &s).map_err(|e| e.to_string())?;
            let b = payoff(&spec, &s, TOL).map_err(|e| e.to_string())?.v;
            let d = max_diff(&a, &b);
            check(d <= 1e-10, || format!("seed {seed}: profile {:?} differs by {d:e}", s.s))?;
        }
    }
    Ok("200 instances".into())
}

fn acceptance_trees() -> Vec<ScenarioTree> {
    (0..50u64)
        .map(|seed| {
            let m = 1 + (seed % 3) as usize;
            let horizon = 1 + ((seed / 3) % 3) as usize;
            let mut tree = ScenarioTree::random(80_000 + seed, m, horizon, 2, Some(gen_k_matrix(seed, m, false)));
            if seed % 2 == 1 {
                // Time-dependent matrices on half of the trees.
                for n in 0..tree.len() {
                    if !tree.is_leaf(n) {
                        let t = tree.node(n).t as u64;
                        tree.set_node_matrix(n, Some(gen_k_matrix(81_000 + 10 * seed + t, m, false)));
                    }
                }
            }
            tree
        })
        .collect()
}

fn multi_period_optimality(trees: &[ScenarioTree]) -> Outcome {
    let start = Instant::now();
    for (k, tree) in trees.iter().enumerate() {
        let vp = backward_induction(tree, TOL).map_err(|e| format!("tree {k}: {e}"))?;
        let root = tree.root();
        let at_root = evaluate_profile(tree, &vp, &vp.tau_star, root, TOL).map_err(|e| e.to_string())?;
        let d = max_diff(&at_root, vp.u.at(root));
        check(d <= 1e-9, || format!("tree {k}: evaluate(τ*) off U by {d:e}"))?;
        let ok = verify_optimal_equilibrium(tree, &vp, &vp.tau_star, TOL, ENUMERATION_BUDGET)
            .map_err(|e| format!("tree {k}: {e}"))?;
        check(ok, || format!("tree {k}: τ* is not an optimal equilibrium"))?;
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("{} trees, {:.2}s", trees.len(), start.elapsed().as_secs_f64()))
}

fn bsde_equivalence(trees: &[ScenarioTree]) -> Outcome {
    for (k, tree) in trees.iter().enumerate() {
        let vp = backward_induction(tree, TOL).map_err(|e| e.to_string())?;
        let sol = solve_reflected_bsde(tree, TOL).map_err(|e| format!("tree {k}: {e}"))?;
        for n in 0..tree.len() {
            let d = max_diff(sol.z.at(n), vp.u.at(n));
            check(d <= 1e-9, || format!("tree {k} node {n}: Z off U by {d:e}"))?;
        }
        let violations = verify_bsde_solution(tree, &sol, TOL);
        check(violations.is_empty(), || format!("tree {k}: {violations:?}"))?;
    }
    Ok(format!("{} trees", trees.len()))
}

fn naive_counterexample_check() -> Outcome {
    let start = Instant::now();
    let tree = naive_counterexample();
    let game = StoppingGame::naive(&tree, TOL).map_err(|e| e.to_string())?;
    let report = nash_search(&game, ENUMERATION_BUDGET).map_err(|e| e.to_string())?;
    check(report.nash_payoffs.len() == 2, || {
        format!("{} distinct Nash payoffs", report.nash_payoffs.len())
    })?;
    check(report.optimal_count == 0, || format!("{} optimal equilibria", report.optimal_count))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!(
        "{} profiles, payoffs {:?}, {:.3}s",
        report.profiles_searched,
        report.nash_payoffs,
        start.elapsed().as_secs_f64()
    ))
}

/// Optimal stopping value `max(X(n), Σ p_c S(c))`, written directly over the
/// node list.
fn running_max_oracle(tree: &ScenarioTree) -> Vec<f64> {
    let mut s = vec![0.0; tree.len()];
    let mut order: Vec<usize> = (0..tree.len()).collect();
    order.sort_by_key(|&n| std::cmp::Reverse(tree.node(n).t));
    for n in order {
        let x = tree.node(n).x[0];
        let kids = tree.children(n);
        s[n] = if kids.is_empty() {
            x
        } else {
            x.max(kids.iter().map(|&c| tree.node(c).p * s[c]).sum())
        };
    }
    s
}

fn snell_reduction() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..100u64 {
        let mut r = rng(90_000 + seed);
        let g = SquareMatrix::from_rows(&[[r.gen_range(0.1..5.0)]]).unwrap();
        let horizon = 1 + (seed % 4) as usize;
        let branching = 2 + (seed % 2) as usize;
        let tree = ScenarioTree::random(91_000 + seed, 1, horizon, branching, Some(g));
        let u = backward_induction(&tree, TOL).map_err(|e| e.to_string())?.u;
        let oracle = running_max_oracle(&tree);
        for (n, o) in oracle.iter().enumerate() {
            let d = (u.at(n)[0] - o).abs();
            worst = worst.max(d);
            check(d <= 1e-12, || format!("seed {seed} node {n}: differs by {d:e}"))?;
        }
    }
    Ok(format!("100 trees, max deviation {worst:.1e}"))
}

fn main() {
    let trees = acceptance_trees();
    let criteria: Vec<Criterion> = vec![
        ("P-matrix equilibria equal SOL", Box::new(p_matrix_equilibria)),
        ("K-matrix WUC, optimality and value", Box::new(k_matrix_wuc_value)),
        ("projection equals SOL", Box::new(projection_equivalence)),
        ("Schur reduction preserves K", Box::new(schur_preservation)),
        ("singular P0' dichotomy", Box::new(singular_dichotomy)),
        ("coalition additivity", Box::new(coalition_additivity)),
        ("redistribution closed form", Box::new(appendix_equivalence)),
        ("multi-period optimality", Box::new(|| multi_period_optimality(&trees))),
        ("reflected recursion equals value", Box::new(|| bsde_equivalence(&trees))),
        ("naive variant counterexample", Box::new(naive_counterexample_check)),
        ("single-player Snell reduction", Box::new(snell_reduction)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
