//! Finite scenario trees: a discrete filtration with conditional edge
//! probabilities, an adapted payoff process `X` and optional per-node matrices.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{classify, SquareMatrix, DEFAULT_TOL};

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: u64,
    pub t: usize,
    #[serde(default)]
    pub parent: Option<u64>,
    /// Conditional probability of reaching this node from its parent.
    #[serde(default = "one")]
    pub p: f64,
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<SquareMatrix>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TreeData {
    #[serde(rename = "T")]
    horizon: usize,
    m: usize,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    g: Option<SquareMatrix>,
    nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeData", into = "TreeData")]
pub struct ScenarioTree {
    horizon: usize,
    m: usize,
    default_g: Option<SquareMatrix>,
    nodes: Vec<TreeNode>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    index: HashMap<u64, usize>,
}

impl TryFrom<TreeData> for ScenarioTree {
    type Error = Error;

    fn try_from(d: TreeData) -> Result<Self> {
        ScenarioTree::new(d.horizon, d.m, d.g, d.nodes)
    }
}

impl From<ScenarioTree> for TreeData {
    fn from(t: ScenarioTree) -> Self {
        TreeData {
            horizon: t.horizon,
            m: t.m,
            g: t.default_g,
            nodes: t.nodes,
        }
    }
}

/// A failed tree invariant; `node` is absent for global violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub node: Option<u64>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.node {
            Some(id) => write!(f, "node {id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ScenarioTree {
    /// Indexes the nodes. Only duplicate ids and dangling parents are fatal
    /// here; everything else is reported by [`ScenarioTree::validate`].
    pub fn new(
        horizon: usize,
        m: usize,
        default_g: Option<SquareMatrix>,
        nodes: Vec<TreeNode>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::InvalidTree(format!("duplicate node id {}", n.id)));
            }
        }
        let mut children = vec![Vec::new(); nodes.len()];
        let mut parent = vec![None; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if let Some(pid) = n.parent {
                let &pi = index
                    .get(&pid)
                    .ok_or_else(|| Error::InvalidTree(format!("node {} has unknown parent {pid}", n.id)))?;
                children[pi].push(i);
                parent[i] = Some(pi);
            }
        }
        Ok(Self {
            horizon,
            m,
            default_g,
            nodes,
            children,
            parent,
            index,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn players(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Index of the root; panics on trees that fail validation.
    pub fn root(&self) -> usize {
        self.parent
            .iter()
            .position(|p| p.is_none())
            .expect("validated tree has a root")
    }

    pub fn default_matrix(&self) -> Option<&SquareMatrix> {
        self.default_g.as_ref()
    }

    /// Node matrix, falling back to the tree-wide default.
    pub fn matrix(&self, i: usize) -> Option<&SquareMatrix> {
        self.nodes[i].g.as_ref().or(self.default_g.as_ref())
    }

    pub fn payoff(&self, i: usize) -> &[f64] {
        &self.nodes[i].x
    }

    /// Node indices sorted by decreasing time (stable within a slice).
    pub fn backward_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[b].t.cmp(&self.nodes[a].t));
        order
    }

    /// Non-terminal nodes in depth-first preorder from the root.
    pub fn decision_nodes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            if !self.is_leaf(n) {
                out.push(n);
                stack.extend(self.children[n].iter().rev());
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut global = |message: String| out.push(Violation { node: None, message });
        let roots: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.parent[i].is_none()).collect();
        match roots.len() {
            1 => {}
            0 => global("tree has no root".into()),
            k => global(format!("tree has {k} roots")),
        }
        if self.m == 0 {
            global("player count m must be positive".into());
        }
        if let Some(g) = &self.default_g {
            if g.dim() != self.m {
                global(format!("default matrix has dimension {} but m = {}", g.dim(), self.m));
            } else if !classify(g, DEFAULT_TOL).map(|c| c.is_k0prime).unwrap_or(false) {
                global("default matrix is not a K0' matrix".into());
            }
        }

        for (i, n) in self.nodes.iter().enumerate() {
            let mut bad = |message: String| {
                out.push(Violation {
                    node: Some(n.id),
                    message,
                })
            };
            if n.x.len() != self.m {
                bad(format!("payoff has length {} but m = {}", n.x.len(), self.m));
            }
            if n.x.iter().any(|v| !v.is_finite()) {
                bad("payoff is not finite".into());
            }
            if !(n.p > 0.0 && n.p.is_finite()) {
                bad(format!("probability {} is not positive", n.p));
            }
            match self.parent[i] {
                None if n.t != 0 => bad(format!("root at time {} instead of 0", n.t)),
                Some(pi) if n.t != self.nodes[pi].t + 1 => bad(format!(
                    "time {} does not follow parent time {}",
                    n.t, self.nodes[pi].t
                )),
                _ => {}
            }
            if n.t > self.horizon {
                bad(format!("time {} exceeds horizon {}", n.t, self.horizon));
            }
            if self.children[i].is_empty() {
                if n.t != self.horizon {
                    bad(format!("leaf at time {} before horizon {}", n.t, self.horizon));
                }
            } else {
                let total: f64 = self.children[i].iter().map(|&c| self.nodes[c].p).sum();
                if (total - 1.0).abs() > PROB_TOL {
                    bad(format!("probabilities sum {total}"));
                }
            }
            if let Some(g) = &n.g {
                if g.dim() != self.m {
                    bad(format!("matrix has dimension {} but m = {}", g.dim(), self.m));
                } else if !classify(g, DEFAULT_TOL).map(|c| c.is_k0prime).unwrap_or(false) {
                    bad("matrix is not a K0' matrix".into());
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTree(
                v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    /// `Σ_c p(c) proc(c)` over the children of `node`.
    pub fn conditional_expectation(&self, proc: &AdaptedProcess, node: usize) -> Result<Vec<f64>> {
        if self.is_leaf(node) {
            return Err(Error::TerminalNode {
                id: self.nodes[node].id,
            });
        }
        let dim = proc.values[self.children[node][0]].len();
        let mut out = vec![0.0; dim];
        for &c in &self.children[node] {
            let p = self.nodes[c].p;
            for (o, v) in out.iter_mut().zip(&proc.values[c]) {
                *o += p * v;
            }
        }
        Ok(out)
    }

    /// The payoff process `X` as an adapted process.
    pub fn payoff_process(&self) -> AdaptedProcess {
        AdaptedProcess {
            values: self.nodes.iter().map(|n| n.x.clone()).collect(),
        }
    }

    /// Deterministic chain with one node per date.
    pub fn chain(payoffs: Vec<Vec<f64>>, g: Option<SquareMatrix>) -> Result<Self> {
        let m = payoffs.first().map_or(0, Vec::len);
        let horizon = payoffs.len().saturating_sub(1);
        let nodes = payoffs
            .into_iter()
            .enumerate()
            .map(|(t, x)| TreeNode {
                id: t as u64,
                t,
                parent: t.checked_sub(1).map(|p| p as u64),
                p: 1.0,
                x,
                g: None,
            })
            .collect();
        Self::new(horizon, m, g, nodes)
    }

    /// Seeded random tree: `branching` children per node with random
    /// probabilities, payoffs uniform in `[-5, 5]`.
    pub fn random(
        seed: u64,
        m: usize,
        horizon: usize,
        branching: usize,
        g: Option<SquareMatrix>,
    ) -> Self {
        assert!(branching >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = vec![TreeNode {
            id: 0,
            t: 0,
            parent: None,
            p: 1.0,
            x: (0..m).map(|_| rng.gen_range(-5.0..=5.0)).collect(),
            g: None,
        }];
        let mut frontier = vec![0u64];
        for t in 1..=horizon {
            let mut next = Vec::new();
            for &pid in &frontier {
                let weights: Vec<f64> = (0..branching).map(|_| rng.gen_range(0.2..1.0)).collect();
                let total: f64 = weights.iter().sum();
                let mut acc = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    // The last child absorbs rounding so the sum is exact.
                    let p = if k + 1 == branching { 1.0 - acc } else { w / total };
                    acc += p;
                    let id = nodes.len() as u64;
                    nodes.push(TreeNode {
                        id,
                        t,
                        parent: Some(pid),
                        p,
                        x: (0..m).map(|_| rng.gen_range(-5.0..=5.0)).collect(),
                        g: None,
                    });
                    next.push(id);
                }
            }
            frontier = next;
        }
        Self::new(horizon, m, g, nodes).expect("generated ids are unique")
    }

    /// Replaces the matrix stored on node `i`.
    pub fn set_node_matrix(&mut self, i: usize, g: Option<SquareMatrix>) {
        self.nodes[i].g = g;
    }
}

/// Node-indexed vectors aligned with the tree's node order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess {
    pub values: Vec<Vec<f64>>,
}

impl AdaptedProcess {
    pub fn zeros(len: usize, m: usize) -> Self {
        Self {
            values: vec![vec![0.0; m]; len],
        }
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Keyed by node id.
    pub fn to_map(&self, tree: &ScenarioTree) -> BTreeMap<u64, Vec<f64>> {
        tree.nodes()
            .iter()
            .zip(&self.values)
            .map(|(n, v)| (n.id, v.clone()))
            .collect()
    }
}
