//! Multi-period stopping games on scenario trees.
//!
//! The game stops at the first node where any player stops. Stoppers
//! receive `X(n)`; everyone else receives the single-period affine payoff
//! anchored at the continuation value `E[U_{t+1} | n]`. At the horizon all
//! players receive `X_T`. The value process is computed by backward
//! induction, `U_T = X_T`, `U_t = SOL(X_t, E[U_{t+1} | F_t], G_t)`.
//!
//! The naive variant anchors non-stoppers at the terminal payoff instead.
//! It can fail to have optimal equilibria in pure strategies, and
//! [`naive_counterexample`] is the built-in instance showing this.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{classify, MatrixClass, SquareMatrix};
use crate::single_period::{full_mask, payoff_mask, sol_with_class, GameSpec};
use crate::tree::{AdaptedProcess, ScenarioTree};

/// Default enumeration budget for brute-force verification.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

/// Per-player stop/continue decisions, indexed `[player][node]`. Entries on
/// leaves are ignored: every remaining player stops at the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingProfile {
    pub stops: Vec<Vec<bool>>,
}

impl StoppingProfile {
    pub fn never(m: usize, nodes: usize) -> Self {
        Self {
            stops: vec![vec![false; nodes]; m],
        }
    }

    pub fn immediately(m: usize, tree: &ScenarioTree) -> Self {
        let mut p = Self::never(m, tree.len());
        for s in &mut p.stops {
            s[tree.root()] = true;
        }
        p
    }

    fn stop_mask(&self, node: usize) -> u32 {
        self.stops
            .iter()
            .enumerate()
            .filter(|(_, s)| s[node])
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    /// Stop-node ids per player, for reporting.
    pub fn stop_ids(&self, tree: &ScenarioTree) -> Vec<Vec<u64>> {
        self.stops
            .iter()
            .map(|s| {
                (0..tree.len())
                    .filter(|&n| s[n] && !tree.is_leaf(n))
                    .map(|n| tree.node(n).id)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueProcess {
    pub u: AdaptedProcess,
    pub tau_star: StoppingProfile,
}

fn node_matrix(tree: &ScenarioTree, n: usize) -> Result<&SquareMatrix> {
    tree.matrix(n)
        .ok_or(Error::MissingMatrix { id: tree.node(n).id })
}

/// Classifications keyed by node; nodes without their own matrix share the
/// default's.
fn node_classes(tree: &ScenarioTree, tol: f64) -> Result<Vec<Option<MatrixClass>>> {
    let default = tree.default_matrix().map(|g| classify(g, tol)).transpose()?;
    (0..tree.len())
        .map(|n| {
            if tree.is_leaf(n) {
                return Ok(None);
            }
            match &tree.node(n).g {
                Some(g) => classify(g, tol).map(Some),
                None => default
                    .ok_or(Error::MissingMatrix { id: tree.node(n).id })
                    .map(Some),
            }
        })
        .collect()
}

fn node_spec(tree: &ScenarioTree, n: usize, anchor: Vec<f64>) -> Result<GameSpec> {
    GameSpec::new(tree.payoff(n).to_vec(), anchor, node_matrix(tree, n)?.clone())
}

pub fn backward_induction(tree: &ScenarioTree, tol: f64) -> Result<ValueProcess> {
    tree.ensure_valid()?;
    let classes = node_classes(tree, tol)?;
    let m = tree.players();
    let mut u = AdaptedProcess::zeros(tree.len(), m);
    let mut tau = StoppingProfile::never(m, tree.len());
    for n in tree.backward_order() {
        if tree.is_leaf(n) {
            u.values[n] = tree.payoff(n).to_vec();
            for s in &mut tau.stops {
                s[n] = true;
            }
            continue;
        }
        let cont = tree.conditional_expectation(&u, n)?;
        let spec = node_spec(tree, n, cont)?;
        let class = classes[n].expect("non-terminal node has a class");
        let v = sol_with_class(&spec, &class, tol)?;
        let eps = spec.eps(tol);
        for (i, s) in tau.stops.iter_mut().enumerate() {
            s[n] = (v[i] - spec.x[i]).abs() <= eps;
        }
        u.values[n] = v;
    }
    Ok(ValueProcess { u, tau_star: tau })
}

/// A stopping game on a tree with a fixed anchoring rule.
#[derive(Debug, Clone)]
pub struct StoppingGame<'a> {
    tree: &'a ScenarioTree,
    anchors: Vec<Vec<f64>>,
    tol: f64,
}

impl<'a> StoppingGame<'a> {
    pub fn standard(tree: &'a ScenarioTree, values: &ValueProcess, tol: f64) -> Result<Self> {
        let anchors = (0..tree.len())
            .map(|n| {
                if tree.is_leaf(n) {
                    Ok(Vec::new())
                } else {
                    tree.conditional_expectation(&values.u, n)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { tree, anchors, tol })
    }

    pub fn naive(tree: &'a ScenarioTree, tol: f64) -> Result<Self> {
        tree.ensure_valid()?;
        let mut terminal = tree.payoff_process();
        for n in tree.backward_order() {
            if !tree.is_leaf(n) {
                terminal.values[n] = tree.conditional_expectation(&terminal, n)?;
            }
        }
        let anchors = (0..tree.len())
            .map(|n| if tree.is_leaf(n) { Vec::new() } else { terminal.values[n].clone() })
            .collect();
        Ok(Self { tree, anchors, tol })
    }

    pub fn tree(&self) -> &ScenarioTree {
        self.tree
    }

    /// Payoff when the players in `mask` are the first to stop, at `node`.
    pub fn stop_payoff(&self, node: usize, mask: u32) -> Result<Vec<f64>> {
        if self.tree.is_leaf(node) {
            return Ok(self.tree.payoff(node).to_vec());
        }
        let spec = node_spec(self.tree, node, self.anchors[node].clone())?;
        Ok(payoff_mask(&spec, mask, self.tol)?.v)
    }

    /// Expected payoff of `profile` conditional on reaching `node`.
    pub fn evaluate(&self, profile: &StoppingProfile, node: usize) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        self.evaluate_with(node, &|n| profile.stop_mask(n), &|n, mask| self.stop_payoff(n, mask))
    }

    fn check_profile(&self, profile: &StoppingProfile) -> Result<()> {
        if profile.stops.len() != self.tree.players()
            || profile.stops.iter().any(|s| s.len() != self.tree.len())
        {
            return Err(Error::InvalidProfile(format!(
                "expected {} players over {} nodes",
                self.tree.players(),
                self.tree.len()
            )));
        }
        Ok(())
    }

    fn evaluate_with(
        &self,
        node: usize,
        mask_at: &dyn Fn(usize) -> u32,
        payoff: &dyn Fn(usize, u32) -> Result<Vec<f64>>,
    ) -> Result<Vec<f64>> {
        let tree = self.tree;
        if tree.is_leaf(node) {
            return Ok(tree.payoff(node).to_vec());
        }
        let mask = mask_at(node);
        if mask != 0 {
            return payoff(node, mask);
        }
        let mut out = vec![0.0; tree.players()];
        for &c in tree.children(node) {
            let v = self.evaluate_with(c, mask_at, payoff)?;
            let p = tree.node(c).p;
            for (o, x) in out.iter_mut().zip(v) {
                *o += p * x;
            }
        }
        Ok(out)
    }

    /// Stop payoffs for every non-terminal node and nonempty stopping set.
    fn payoff_table(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let m = self.tree.players();
        (0..self.tree.len())
            .map(|n| {
                if self.tree.is_leaf(n) {
                    return Ok(Vec::new());
                }
                (0..=full_mask(m)).map(|mask| {
                    if mask == 0 {
                        Ok(Vec::new())
                    } else {
                        self.stop_payoff(n, mask)
                    }
                })
                .collect()
            })
            .collect()
    }
}

/// Expected payoff of `profile` at `node` in the standard game.
pub fn evaluate_profile(
    tree: &ScenarioTree,
    values: &ValueProcess,
    profile: &StoppingProfile,
    node: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    StoppingGame::standard(tree, values, tol)?.evaluate(profile, node)
}

/// Expected payoff of `profile` at `node` when non-stoppers are anchored at `X_T`.
pub fn naive_evaluate_profile(
    tree: &ScenarioTree,
    profile: &StoppingProfile,
    node: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    StoppingGame::naive(tree, tol)?.evaluate(profile, node)
}

/// All distinct stopping times of one player, as stop-flag vectors with no
/// decisions below the first stop on any path.
pub fn stopping_times(tree: &ScenarioTree) -> Vec<Vec<bool>> {
    fn rec(tree: &ScenarioTree, n: usize) -> Vec<Vec<usize>> {
        if tree.is_leaf(n) {
            return vec![Vec::new()];
        }
        let mut out = vec![vec![n]];
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for &c in tree.children(n) {
            let sub = rec(tree, c);
            combos = combos
                .iter()
                .flat_map(|base| {
                    sub.iter().map(move |s| {
                        let mut v = base.clone();
                        v.extend_from_slice(s);
                        v
                    })
                })
                .collect();
        }
        out.extend(combos);
        out
    }
    rec(tree, tree.root())
        .into_iter()
        .map(|stops| {
            let mut flags = vec![false; tree.len()];
            for n in stops {
                flags[n] = true;
            }
            flags
        })
        .collect()
}

/// Number of distinct stopping times of one player.
pub fn count_stopping_times(tree: &ScenarioTree) -> u128 {
    fn rec(tree: &ScenarioTree, n: usize) -> u128 {
        if tree.is_leaf(n) {
            return 1;
        }
        tree.children(n)
            .iter()
            .fold(1u128, |acc, &c| acc.saturating_mul(rec(tree, c)))
            .saturating_add(1)
    }
    rec(tree, tree.root())
}

fn check_budget(tree: &ScenarioTree, budget: u128) -> Result<u128> {
    let per = count_stopping_times(tree);
    let count = (0..tree.players()).fold(1u128, |acc, _| acc.saturating_mul(per));
    if count > budget {
        Err(Error::EnumerationTooLarge { count, budget })
    } else {
        Ok(per)
    }
}

/// Fast evaluator over canonical stopping times with cached stop payoffs.
struct Enumerator<'g, 'a> {
    game: &'g StoppingGame<'a>,
    table: Vec<Vec<Vec<f64>>>,
    times: Vec<Vec<bool>>,
}

impl<'g, 'a> Enumerator<'g, 'a> {
    fn new(game: &'g StoppingGame<'a>) -> Result<Self> {
        Ok(Self {
            table: game.payoff_table()?,
            times: stopping_times(game.tree),
            game,
        })
    }

    /// Root payoff when player `k` uses `choice[k]` (a stopping-time index),
    /// or the explicit flags in `fixed` where given.
    fn root_payoff(&self, choice: &[usize], fixed: &[Option<&Vec<bool>>]) -> Vec<f64> {
        let flags = |k: usize| -> &Vec<bool> { fixed[k].unwrap_or(&self.times[choice[k]]) };
        let mask_at = |n: usize| -> u32 {
            (0..choice.len())
                .filter(|&k| flags(k)[n])
                .fold(0, |acc, k| acc | (1 << k))
        };
        let payoff = |n: usize, mask: u32| Ok(self.table[n][mask as usize].clone());
        self.game
            .evaluate_with(self.game.tree.root(), &mask_at, &payoff)
            .expect("cached payoffs are infallible")
    }

    /// Root payoffs for every joint profile, mixed-radix indexed with player 0 fastest.
    fn joint_payoffs(&self) -> Vec<Vec<f64>> {
        let m = self.game.tree.players();
        let per = self.times.len();
        let total = per.pow(m as u32);
        let none = vec![None; m];
        let mut choice = vec![0usize; m];
        (0..total)
            .map(|idx| {
                let mut r = idx;
                for c in choice.iter_mut() {
                    *c = r % per;
                    r /= per;
                }
                self.root_payoff(&choice, &none)
            })
            .collect()
    }
}

/// Checks `V_k(d, profile^{-k}) ≤ U_k(root) ≤ V_k(profile^k, t^{-k})` for
/// every own deviation `d` and every joint adversary deviation `t^{-k}`.
pub fn verify_optimal_equilibrium(
    tree: &ScenarioTree,
    values: &ValueProcess,
    profile: &StoppingProfile,
    tol: f64,
    budget: u128,
) -> Result<bool> {
    let per = check_budget(tree, budget)? as usize;
    let game = StoppingGame::standard(tree, values, tol)?;
    game.check_profile(profile)?;
    let en = Enumerator::new(&game)?;
    let m = tree.players();
    let root = tree.root();
    let target = values.u.at(root);
    let eps = tol * (1.0 + target.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
    let mut choice = vec![0usize; m];
    for k in 0..m {
        // Own deviations against the others' profile.
        let mut fixed: Vec<Option<&Vec<bool>>> = profile.stops.iter().map(Some).collect();
        for d in 0..per {
            fixed[k] = None;
            choice[k] = d;
            if en.root_payoff(&choice, &fixed)[k] > target[k] + eps {
                return Ok(false);
            }
        }
        // Joint adversary deviations against the player's own profile.
        let mut fixed: Vec<Option<&Vec<bool>>> = vec![None; m];
        fixed[k] = Some(&profile.stops[k]);
        let others = per.pow((m - 1) as u32);
        for idx in 0..others {
            let mut r = idx;
            for (j, c) in choice.iter_mut().enumerate() {
                if j != k {
                    *c = r % per;
                    r /= per;
                }
            }
            if en.root_payoff(&choice, &fixed)[k] < target[k] - eps {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sup-inf and inf-sup of `Σ_{i∈A} V_i` at the root over pure stopping times.
pub fn coalition_value_tree(
    tree: &ScenarioTree,
    values: &ValueProcess,
    coalition: &[usize],
    tol: f64,
    budget: u128,
) -> Result<Option<f64>> {
    let m = tree.players();
    if coalition.is_empty() || coalition.iter().any(|&i| i >= m) {
        return Err(Error::InvalidProfile(format!("bad coalition {coalition:?}")));
    }
    for n in (0..tree.len()).filter(|&n| !tree.is_leaf(n)) {
        let g = node_matrix(tree, n)?;
        let c = classify(g, tol)?;
        if !(c.is_k0prime && c.column_sums_nonneg) {
            return Err(Error::HypothesisViolated(format!(
                "matrix at node {} must be K0' with nonnegative column sums",
                tree.node(n).id
            )));
        }
    }
    let per = check_budget(tree, budget)? as usize;
    let game = StoppingGame::standard(tree, values, tol)?;
    let en = Enumerator::new(&game)?;
    let joint = en.joint_payoffs();
    let in_a: Vec<bool> = (0..m).map(|i| coalition.contains(&i)).collect();
    let sum = |v: &[f64]| -> f64 { (0..m).filter(|&i| in_a[i]).map(|i| v[i]).sum() };

    let strides: Vec<usize> = (0..m).map(|k| per.pow(k as u32)).collect();
    let group_indices = |members: &[usize]| -> Vec<usize> {
        let count = per.pow(members.len() as u32);
        (0..count)
            .map(|idx| {
                let mut r = idx;
                members.iter().fold(0, |acc, &k| {
                    let c = r % per;
                    r /= per;
                    acc + c * strides[k]
                })
            })
            .collect()
    };
    let ours: Vec<usize> = (0..m).filter(|&i| in_a[i]).collect();
    let theirs: Vec<usize> = (0..m).filter(|&i| !in_a[i]).collect();
    let a_idx = group_indices(&ours);
    let b_idx = group_indices(&theirs);
    let lower = a_idx
        .iter()
        .map(|&a| b_idx.iter().map(|&b| sum(&joint[a + b])).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = b_idx
        .iter()
        .map(|&b| a_idx.iter().map(|&a| sum(&joint[a + b])).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    let scale = 1.0 + values.u.at(tree.root()).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok(((upper - lower).abs() <= tol * scale * m as f64).then_some(lower))
}

/// Result of an exhaustive pure-strategy equilibrium search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashSearchReport {
    pub profiles_searched: usize,
    pub nash_count: usize,
    /// Distinct root payoffs among the Nash profiles.
    pub nash_payoffs: Vec<Vec<f64>>,
    pub optimal_count: usize,
}

/// Enumerates every joint profile of stopping times and reports Nash and
/// optimal equilibria at the root.
pub fn nash_search(game: &StoppingGame<'_>, budget: u128) -> Result<NashSearchReport> {
    let tree = game.tree;
    let per = check_budget(tree, budget)? as usize;
    let en = Enumerator::new(game)?;
    let joint = en.joint_payoffs();
    let m = tree.players();
    let strides: Vec<usize> = (0..m).map(|k| per.pow(k as u32)).collect();
    let scale = 1.0
        + joint
            .iter()
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
    let eps = game.tol * scale;

    let mut nash_payoffs: Vec<Vec<f64>> = Vec::new();
    let mut nash_count = 0;
    let mut optimal_count = 0;
    for (idx, v) in joint.iter().enumerate() {
        let own = |k: usize| (idx / strides[k]) % per;
        let is_nash = (0..m).all(|k| {
            let base = idx - own(k) * strides[k];
            (0..per).all(|d| joint[base + d * strides[k]][k] <= v[k] + eps)
        });
        if !is_nash {
            continue;
        }
        nash_count += 1;
        if !nash_payoffs
            .iter()
            .any(|p| p.iter().zip(v).all(|(a, b)| (a - b).abs() <= eps))
        {
            nash_payoffs.push(v.clone());
        }
        let optimal = (0..m).all(|k| {
            let mine = own(k) * strides[k];
            (0..joint.len())
                .filter(|&j| (j / strides[k]) % per * strides[k] == mine)
                .all(|j| joint[j][k] >= v[k] - eps)
        });
        if optimal {
            optimal_count += 1;
        }
    }
    Ok(NashSearchReport {
        profiles_searched: joint.len(),
        nash_count,
        nash_payoffs,
        optimal_count,
    })
}

/// Three players on a deterministic chain with decision dates 0 and 1 and
/// forced exercise at date 2.
pub fn naive_counterexample() -> ScenarioTree {
    let g = SquareMatrix::from_rows(&[
        [2.0 / 9.0, -1.0 / 9.0, -1.0 / 9.0],
        [-1.0 / 9.0, 2.0 / 9.0, -1.0 / 9.0],
        [-1.0 / 9.0, -1.0 / 9.0, 2.0 / 9.0],
    ])
    .expect("finite");
    ScenarioTree::chain(
        vec![
            vec![-1.0, -1.0, 0.0],
            vec![-2.0, -2.0, 4.0],
            vec![0.0, 0.0, 0.0],
        ],
        Some(g),
    )
    .expect("chain ids are unique")
}
