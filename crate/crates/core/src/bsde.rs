//! Reduced-form reflected backward recursion on a scenario tree:
//! `Z_T = X_T`, `Z_t − ΔJ_{t+1} = E[Z_{t+1} | F_t]`, `ΔJ = G ΔK`, with
//! `Z ≥ X`, `ΔK ≥ 0` and `1{Z_t > X_t}ᵀ ΔK_{t+1} = 0`.
//!
//! Each node reduces to `LCP(p − x, G)` with `p = E[Z_{t+1} | F_t]`; the
//! LCP variable is the reflection increment `ΔK_{t+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcp::{solve_enum, verify_solution, LcpProblem, LcpSolution};
use crate::matrices::{classify, SquareMatrix};
use crate::tree::{AdaptedProcess, ScenarioTree};

#[derive(Debug, Clone, PartialEq)]
pub struct BsdeSolution {
    pub z: AdaptedProcess,
    /// Cumulative `J`, zero at the root; `J(child) = J(parent) + G ΔK(parent)`.
    pub j: AdaptedProcess,
    /// Cumulative `K`, zero at the root.
    pub k: AdaptedProcess,
    /// `ΔK_{t+1}` stored on the time-`t` node (zero on leaves).
    pub delta_k: AdaptedProcess,
}

/// A failed invariant of a candidate solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsdeViolation {
    pub node: u64,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Shape,
    Terminal,
    Obstacle,
    Recursion,
    Monotonicity,
    Predictability,
    Slackness,
}

fn k_matrix(tree: &ScenarioTree, n: usize, tol: f64) -> Result<&SquareMatrix> {
    let id = tree.node(n).id;
    let g = tree.matrix(n).ok_or(Error::MissingMatrix { id })?;
    let class = classify(g, tol)?;
    if class.is_k {
        Ok(g)
    } else {
        Err(Error::NotKMatrix { id })
    }
}

pub fn solve_reflected_bsde(tree: &ScenarioTree, tol: f64) -> Result<BsdeSolution> {
    let order = tree.backward_order();
    solve_in_order(tree, &order, tol)
}

/// Solves with non-terminal nodes visited in the order given by
/// `permutation`, stably re-sorted so children precede parents.
pub fn solve_reflected_bsde_permuted(
    tree: &ScenarioTree,
    permutation: &[usize],
    tol: f64,
) -> Result<BsdeSolution> {
    let mut order = permutation.to_vec();
    let mut seen = vec![false; tree.len()];
    if order.len() != tree.len() || order.iter().any(|&i| i >= tree.len() || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidTree("node order is not a permutation".into()));
    }
    order.sort_by_key(|&i| std::cmp::Reverse(tree.node(i).t));
    solve_in_order(tree, &order, tol)
}

fn solve_in_order(tree: &ScenarioTree, order: &[usize], tol: f64) -> Result<BsdeSolution> {
    tree.ensure_valid()?;
    let m = tree.players();
    let len = tree.len();
    let mut z = AdaptedProcess::zeros(len, m);
    let mut delta_k = AdaptedProcess::zeros(len, m);
    let mut node_g: Vec<Option<&SquareMatrix>> = vec![None; len];
    for &n in order {
        if tree.is_leaf(n) {
            z.values[n] = tree.payoff(n).to_vec();
            continue;
        }
        let g = k_matrix(tree, n, tol)?;
        node_g[n] = Some(g);
        let p = tree.conditional_expectation(&z, n)?;
        let (sol, _) = node_problem(tree, n, &p, g, tol)?;
        let x = tree.payoff(n);
        z.values[n] = x.iter().zip(&sol.w).map(|(a, b)| a + b).collect();
        delta_k.values[n] = sol.z;
    }

    // Forward accumulation of K and J from the root.
    let mut k = AdaptedProcess::zeros(len, m);
    let mut j = AdaptedProcess::zeros(len, m);
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        if let Some(g) = node_g[n] {
            let dj = g.mul_vec(&delta_k.values[n]);
            for &c in tree.children(n) {
                k.values[c] = k.values[n].iter().zip(&delta_k.values[n]).map(|(a, b)| a + b).collect();
                j.values[c] = j.values[n].iter().zip(&dj).map(|(a, b)| a + b).collect();
                stack.push(c);
            }
        }
    }
    Ok(BsdeSolution { z, j, k, delta_k })
}

fn node_problem(
    tree: &ScenarioTree,
    n: usize,
    p: &[f64],
    g: &SquareMatrix,
    tol: f64,
) -> Result<(LcpSolution, LcpProblem)> {
    let q: Vec<f64> = p.iter().zip(tree.payoff(n)).map(|(a, b)| a - b).collect();
    let problem = LcpProblem::new(q, g.clone())?;
    let sol = solve_enum(&problem, tol)?.ok_or(Error::NoSolution)?;
    Ok((sol, problem))
}

/// Checks every invariant of `sol` against `tree`; an empty list means valid.
pub fn verify_bsde_solution(tree: &ScenarioTree, sol: &BsdeSolution, tol: f64) -> Vec<BsdeViolation> {
    let mut out = Vec::new();
    let m = tree.players();
    let len = tree.len();
    let procs = [&sol.z, &sol.j, &sol.k, &sol.delta_k];
    if procs
        .iter()
        .any(|p| p.values.len() != len || p.values.iter().any(|v| v.len() != m))
    {
        out.push(BsdeViolation {
            node: tree.node(tree.root()).id,
            kind: ViolationKind::Shape,
            detail: format!("processes must have {len} nodes of length {m}"),
        });
        return out;
    }
    let scale = 1.0
        + sol
            .z
            .values
            .iter()
            .chain(&sol.k.values)
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
    let eps = tol * scale;
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps);

    let root = tree.root();
    if !sol.k.values[root].iter().chain(&sol.j.values[root]).all(|v| v.abs() <= eps) {
        out.push(BsdeViolation {
            node: tree.node(root).id,
            kind: ViolationKind::Predictability,
            detail: "K and J must vanish at the root".into(),
        });
    }

    for n in 0..len {
        let id = tree.node(n).id;
        let x = tree.payoff(n);
        let zn = &sol.z.values[n];
        let mut push = |kind, detail: String| out.push(BsdeViolation { node: id, kind, detail });
        if let Some(i) = (0..m).find(|&i| zn[i] < x[i] - eps) {
            push(ViolationKind::Obstacle, format!("Z[{i}] = {} below X[{i}] = {}", zn[i], x[i]));
        }
        if tree.is_leaf(n) {
            if !close(zn, x) {
                push(ViolationKind::Terminal, format!("Z = {zn:?} differs from X = {x:?}"));
            }
            continue;
        }
        let dk = &sol.delta_k.values[n];
        if let Some(i) = (0..m).find(|&i| dk[i] < -eps) {
            push(ViolationKind::Monotonicity, format!("ΔK[{i}] = {} is negative", dk[i]));
        }
        let slack: f64 = (0..m).filter(|&i| zn[i] > x[i] + eps).map(|i| dk[i]).sum();
        if slack.abs() > eps {
            push(ViolationKind::Slackness, format!("reflection {slack} where Z > X"));
        }
        let Some(g) = tree.matrix(n) else {
            push(ViolationKind::Shape, "no matrix for node".into());
            continue;
        };
        let dj = g.mul_vec(dk);
        let Ok(p) = tree.conditional_expectation(&sol.z, n) else { continue };
        let lhs: Vec<f64> = zn.iter().zip(&dj).map(|(a, b)| a - b).collect();
        if !close(&lhs, &p) {
            push(ViolationKind::Recursion, format!("Z − GΔK = {lhs:?} but E[Z'] = {p:?}"));
        }
        for &c in tree.children(n) {
            let cid = tree.node(c).id;
            let dk_edge: Vec<f64> = sol.k.values[c].iter().zip(&sol.k.values[n]).map(|(a, b)| a - b).collect();
            if dk_edge.iter().any(|&v| v < -eps) {
                out.push(BsdeViolation {
                    node: cid,
                    kind: ViolationKind::Monotonicity,
                    detail: format!("K decreases on the edge from node {id}"),
                });
            }
            if !close(&dk_edge, dk) {
                out.push(BsdeViolation {
                    node: cid,
                    kind: ViolationKind::Predictability,
                    detail: format!("K increment differs from ΔK stored on node {id}"),
                });
            }
            let dj_edge: Vec<f64> = sol.j.values[c].iter().zip(&sol.j.values[n]).map(|(a, b)| a - b).collect();
            if !close(&dj_edge, &dj) {
                out.push(BsdeViolation {
                    node: cid,
                    kind: ViolationKind::Recursion,
                    detail: format!("J increment differs from G ΔK on node {id}"),
                });
            }
        }
    }
    out
}

/// Re-checks each node's `(Z, ΔK)` as a solution of its complementarity problem.
pub fn node_problems_hold(tree: &ScenarioTree, sol: &BsdeSolution, tol: f64) -> Result<bool> {
    for n in (0..tree.len()).filter(|&n| !tree.is_leaf(n)) {
        let g = k_matrix(tree, n, tol)?;
        let p = tree.conditional_expectation(&sol.z, n)?;
        let q: Vec<f64> = p.iter().zip(tree.payoff(n)).map(|(a, b)| a - b).collect();
        let problem = LcpProblem::new(q, g.clone())?;
        let w: Vec<f64> = sol.z.values[n].iter().zip(tree.payoff(n)).map(|(a, b)| a - b).collect();
        let z = sol.delta_k.values[n].clone();
        let support = (0..z.len()).filter(|&i| z[i] > 0.0).collect();
        if !verify_solution(&problem, &LcpSolution { z, w, support }, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{gen_k_matrix, DEFAULT_TOL};
    use crate::multi_period::backward_induction;

    const TOL: f64 = DEFAULT_TOL;

    fn chain() -> ScenarioTree {
        ScenarioTree::chain(vec![vec![1.0], vec![3.0], vec![2.0]], Some(SquareMatrix::identity(1))).unwrap()
    }

    #[test]
    fn one_dimensional_obstacle() {
        let tree = chain();
        let s = solve_reflected_bsde(&tree, TOL).unwrap();
        assert_eq!(s.z.values, vec![vec![3.0], vec![3.0], vec![2.0]]);
        // Z_0 = 3 > X_0 = 1: no reflection at the root.
        assert_eq!(s.delta_k.values[0], vec![0.0]);
        // Z_1 = X_1: reflection 3 − 2 = 1 pushes the continuation up to the obstacle.
        assert_eq!(s.delta_k.values[1], vec![1.0]);
        assert_eq!(s.k.values[2], vec![1.0]);
        assert!(verify_bsde_solution(&tree, &s, TOL).is_empty());
        assert!(node_problems_hold(&tree, &s, TOL).unwrap());
    }

    #[test]
    fn horizon_zero() {
        let tree = ScenarioTree::chain(vec![vec![4.0, -1.0]], None).unwrap();
        let s = solve_reflected_bsde(&tree, TOL).unwrap();
        assert_eq!(s.z.values, vec![vec![4.0, -1.0]]);
        assert_eq!(s.k.values, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn matches_value_process() {
        for seed in 0..10 {
            let tree = ScenarioTree::random(seed, 3, 3, 2, Some(gen_k_matrix(seed, 3, false)));
            let s = solve_reflected_bsde(&tree, TOL).unwrap();
            let vp = backward_induction(&tree, TOL).unwrap();
            for (a, b) in s.z.values.iter().flatten().zip(vp.u.values.iter().flatten()) {
                assert!((a - b).abs() <= 1e-9);
            }
            assert!(verify_bsde_solution(&tree, &s, TOL).is_empty());
        }
    }

    #[test]
    fn perturbations_are_reported() {
        let tree = chain();
        let good = solve_reflected_bsde(&tree, TOL).unwrap();

        let mut low = good.clone();
        low.z.values[1] = vec![2.5];
        let v = verify_bsde_solution(&tree, &low, TOL);
        assert!(v.iter().any(|v| v.node == 1 && v.kind == ViolationKind::Obstacle));

        let mut dec = good.clone();
        dec.k.values[2] = vec![-0.5];
        let v = verify_bsde_solution(&tree, &dec, TOL);
        assert!(v.iter().any(|v| v.node == 2 && v.kind == ViolationKind::Monotonicity));
    }

    #[test]
    fn singular_matrices_rejected() {
        let g = SquareMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let tree = ScenarioTree::chain(vec![vec![0.0, 0.0], vec![1.0, 1.0]], Some(g)).unwrap();
        assert_eq!(solve_reflected_bsde(&tree, TOL), Err(Error::NotKMatrix { id: 0 }));
    }
}
