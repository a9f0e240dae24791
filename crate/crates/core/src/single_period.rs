//! Single-period affine games.
//!
//! Each player either exercises (`s_i = 0`) and receives `X_i`, or waits
//! (`s_i = 1`). The payoff deviation of the waiting players from `P` lies in
//! the span of the exercising players' columns of `G`:
//! `V = P + G_{·E} (G_EE)⁻¹ (X_E − P_E)`.
//!
//! Profiles are handled internally as bitmasks where bit `i` set means
//! player `i` exercises.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcp::{norm_inf, solvability_p0prime, solve_enum, LcpProblem, P0Solvability};
use crate::matrices::{classify, is_nonsingular, MatrixClass, SquareMatrix, ENUMERATION_CAP};
use crate::projection::weighted_orthant_projection;

/// Cap for the sup-inf brute force routines.
pub const VALUE_CAP: usize = 12;
const TABLE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "G")]
    pub g: SquareMatrix,
    /// Players that may never exercise (the dummy of the zero-sum extension).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub locked: Vec<usize>,
}

impl GameSpec {
    pub fn new(x: Vec<f64>, p: Vec<f64>, g: SquareMatrix) -> Result<Self> {
        let spec = Self {
            x,
            p,
            g,
            locked: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks shapes, finiteness and a positive diagonal for every player
    /// allowed to exercise.
    pub fn validate(&self) -> Result<()> {
        let m = self.g.dim();
        for v in [&self.x, &self.p] {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: v.len(),
                });
            }
            if v.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        if let Some(&i) = self.locked.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidGame(format!("locked player {i} out of range")));
        }
        for i in (0..m).filter(|i| !self.locked.contains(i)) {
            if self.g.get(i, i) <= 0.0 {
                return Err(Error::InvalidGame(format!(
                    "diagonal entry G[{i}][{i}] = {} is not positive",
                    self.g.get(i, i)
                )));
            }
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.g.dim()
    }

    /// Seeded `X` and `P`, uniform in `[-5, 5]`, for a given matrix.
    pub fn random_payoffs(seed: u64, g: SquareMatrix) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = g.dim();
        let x = (0..m).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        let p = (0..m).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        Self::new(x, p, g)
    }

    /// Tolerance scaled by payoff magnitude.
    pub fn eps(&self, tol: f64) -> f64 {
        tol * (1.0 + norm_inf(&self.x).max(norm_inf(&self.p)))
    }

    /// Bitmask of players allowed to exercise.
    fn free_mask(&self) -> u32 {
        let all = full_mask(self.players());
        self.locked.iter().fold(all, |acc, &i| acc & !(1 << i))
    }
}

pub(crate) fn full_mask(m: usize) -> u32 {
    if m >= 32 {
        u32::MAX
    } else {
        (1u32 << m) - 1
    }
}

pub(crate) fn mask_players(mask: u32, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask & (1 << i) != 0).collect()
}

/// Iterates all submasks of `mask`, including zero and `mask`.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Pure strategy profile; `s[i] == 0` means player `i` exercises.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile {
    pub s: Vec<u8>,
}

impl StrategyProfile {
    pub fn new(s: Vec<u8>) -> Result<Self> {
        if s.iter().any(|&b| b > 1) {
            return Err(Error::InvalidProfile("entries must be 0 or 1".into()));
        }
        Ok(Self { s })
    }

    pub fn from_exercising(m: usize, exercising: &[usize]) -> Self {
        let mut s = vec![1; m];
        for &i in exercising {
            s[i] = 0;
        }
        Self { s }
    }

    pub(crate) fn from_mask(m: usize, mask: u32) -> Self {
        Self {
            s: (0..m).map(|i| u8::from(mask & (1 << i) == 0)).collect(),
        }
    }

    pub fn exercise_mask(&self) -> u32 {
        self.s
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 0)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    /// The set `E(s)` of exercising players.
    pub fn exercising(&self) -> Vec<usize> {
        (0..self.s.len()).filter(|&i| self.s[i] == 0).collect()
    }
}

/// Masks in lexicographic order of the corresponding `s` vectors.
fn lexicographic_masks(m: usize) -> impl Iterator<Item = u32> {
    (0..1u32 << m).map(move |idx| {
        // s_i is bit (m-1-i) of idx; exercising means s_i == 0.
        let mut mask = 0;
        for i in 0..m {
            if (idx >> (m - 1 - i)) & 1 == 0 {
                mask |= 1 << i;
            }
        }
        mask
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffOutcome {
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    /// Coefficients `a` with `V = P + G a`, zero off `E(s)`. Absent when all
    /// players exercise and `G` is singular.
    pub a: Option<Vec<f64>>,
}

pub fn payoff(spec: &GameSpec, s: &StrategyProfile, tol: f64) -> Result<PayoffOutcome> {
    if s.s.len() != spec.players() {
        return Err(Error::DimensionMismatch {
            expected: spec.players(),
            found: s.s.len(),
        });
    }
    payoff_mask(spec, s.exercise_mask(), tol)
}

/// Payoff for an explicit exercising set `E`.
pub fn payoff_for_set(spec: &GameSpec, exercising: &[usize], tol: f64) -> Result<PayoffOutcome> {
    let mask = exercising.iter().fold(0u32, |acc, &i| acc | (1 << i));
    payoff_mask(spec, mask, tol)
}

pub(crate) fn payoff_mask(spec: &GameSpec, mask: u32, tol: f64) -> Result<PayoffOutcome> {
    let m = spec.players();
    if mask & !spec.free_mask() != 0 {
        return Err(Error::InvalidProfile(format!(
            "locked players {:?} cannot exercise",
            mask_players(mask & !spec.free_mask(), m)
        )));
    }
    let e = mask_players(mask, m);
    if e.is_empty() {
        return Ok(PayoffOutcome {
            v: spec.p.clone(),
            a: Some(vec![0.0; m]),
        });
    }
    let rhs: Vec<f64> = e.iter().map(|&i| spec.x[i] - spec.p[i]).collect();
    let sub = spec.g.principal(&e);
    let solved = if is_nonsingular(&spec.g, &e, tol) {
        sub.solve(&rhs)
    } else {
        None
    };
    let a_e = match solved {
        Some(a) => a,
        None if e.len() == m => {
            // Everyone exercises against a singular G.
            return Ok(PayoffOutcome {
                v: spec.x.clone(),
                a: None,
            });
        }
        None => return Err(Error::SingularSubmatrix { players: e }),
    };
    let mut a = vec![0.0; m];
    for (&i, v) in e.iter().zip(&a_e) {
        a[i] = *v;
    }
    let mut v = spec.p.clone();
    for (k, vk) in v.iter_mut().enumerate() {
        *vk += e.iter().zip(&a_e).map(|(&i, ai)| spec.g.get(k, i) * ai).sum::<f64>();
    }
    for &i in &e {
        v[i] = spec.x[i];
    }
    Ok(PayoffOutcome { v, a: Some(a) })
}

/// Payoff vectors for every admissible exercise mask.
pub(crate) struct PayoffTable {
    rows: Vec<Option<Vec<f64>>>,
}

impl PayoffTable {
    pub(crate) fn build(spec: &GameSpec, tol: f64) -> Result<Self> {
        let m = spec.players();
        if m > TABLE_CAP {
            return Err(Error::DimensionTooLarge { m, cap: TABLE_CAP });
        }
        let free = spec.free_mask();
        let mut rows = vec![None; 1 << m];
        for mask in submasks(free) {
            rows[mask as usize] = Some(payoff_mask(spec, mask, tol)?.v);
        }
        Ok(Self { rows })
    }

    #[inline]
    pub(crate) fn get(&self, mask: u32) -> &[f64] {
        self.rows[mask as usize]
            .as_deref()
            .expect("mask restricted to admissible profiles")
    }
}

fn check_cap(m: usize, cap: usize) -> Result<()> {
    if m > cap {
        Err(Error::DimensionTooLarge { m, cap })
    } else {
        Ok(())
    }
}

/// All pure Nash equilibria in lexicographic order of `s`.
pub fn enumerate_nash(spec: &GameSpec, tol: f64) -> Result<Vec<StrategyProfile>> {
    let m = spec.players();
    check_cap(m, ENUMERATION_CAP)?;
    let free = spec.free_mask();
    let eps = spec.eps(tol);
    let table = if m <= TABLE_CAP {
        Some(PayoffTable::build(spec, tol)?)
    } else {
        None
    };
    let lookup = |mask: u32| -> Result<Vec<f64>> {
        match &table {
            Some(t) => Ok(t.get(mask).to_vec()),
            None => Ok(payoff_mask(spec, mask, tol)?.v),
        }
    };
    let mut out = Vec::new();
    for mask in lexicographic_masks(m).filter(|mk| mk & !free == 0) {
        let v = lookup(mask)?;
        let mut nash = true;
        for k in (0..m).filter(|k| free & (1 << k) != 0) {
            let dev = lookup(mask ^ (1 << k))?;
            if dev[k] > v[k] + eps {
                nash = false;
                break;
            }
        }
        if nash {
            out.push(StrategyProfile::from_mask(m, mask));
        }
    }
    Ok(out)
}

/// The unique Nash equilibrium payoff.
pub fn sol(spec: &GameSpec, tol: f64) -> Result<Vec<f64>> {
    let class = classify(&spec.g, tol)?;
    sol_with_class(spec, &class, tol)
}

/// As [`sol`], reusing a classification of `spec.g`.
pub fn sol_with_class(spec: &GameSpec, class: &MatrixClass, tol: f64) -> Result<Vec<f64>> {
    if !spec.locked.is_empty() || !class.is_p0prime {
        return Err(Error::NotCovered);
    }
    let q: Vec<f64> = spec.p.iter().zip(&spec.x).map(|(p, x)| p - x).collect();
    let problem = LcpProblem::new(q, spec.g.clone())?;
    let plus_x = |w: &[f64]| spec.x.iter().zip(w).map(|(x, w)| x + w).collect::<Vec<_>>();
    if class.is_p {
        let s = solve_enum(&problem, tol)?.ok_or(Error::NoSolution)?;
        return Ok(plus_x(&s.w));
    }
    match solvability_p0prime(&problem, tol)? {
        P0Solvability::Solvable(s) => Ok(plus_x(&s.w)),
        // All-exercise is then a Nash equilibrium.
        P0Solvability::Unsolvable(_) => Ok(spec.x.clone()),
    }
}

/// Exercises exactly the players whose equilibrium payoff equals `X_i`.
pub fn canonical_equilibrium(spec: &GameSpec, tol: f64) -> Result<StrategyProfile> {
    let v = sol(spec, tol)?;
    Ok(canonical_from_value(spec, &v, tol))
}

pub(crate) fn canonical_from_value(spec: &GameSpec, v: &[f64], tol: f64) -> StrategyProfile {
    let eps = spec.eps(tol);
    let exercising: Vec<usize> = (0..spec.players())
        .filter(|&i| (v[i] - spec.x[i]).abs() <= eps)
        .collect();
    StrategyProfile::from_exercising(spec.players(), &exercising)
}

/// Nash, and each player's equilibrium payoff is a floor against any
/// joint deviation of the others.
pub fn is_optimal_equilibrium(spec: &GameSpec, s: &StrategyProfile, tol: f64) -> Result<bool> {
    let m = spec.players();
    check_cap(m, TABLE_CAP)?;
    if s.s.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: s.s.len(),
        });
    }
    let table = PayoffTable::build(spec, tol)?;
    let free = spec.free_mask();
    let mask = s.exercise_mask();
    if mask & !free != 0 {
        return Err(Error::InvalidProfile("locked player exercises".into()));
    }
    Ok(optimal_in_table(&table, m, free, mask, spec.eps(tol)))
}

fn optimal_in_table(table: &PayoffTable, m: usize, free: u32, mask: u32, eps: f64) -> bool {
    let v = table.get(mask);
    for k in (0..m).filter(|k| free & (1 << k) != 0) {
        if table.get(mask ^ (1 << k))[k] > v[k] + eps {
            return false;
        }
    }
    for (k, &vk) in v.iter().enumerate().take(m) {
        let own = mask & (1 << k);
        let others = free & !(1 << k);
        for t in submasks(others) {
            if table.get(t | own)[k] < vk - eps {
                return false;
            }
        }
    }
    true
}

/// Weak unilateral competitiveness, checked over every unilateral switch.
pub fn wuc_check(spec: &GameSpec, tol: f64) -> Result<bool> {
    let m = spec.players();
    check_cap(m, VALUE_CAP)?;
    let table = PayoffTable::build(spec, tol)?;
    let free = spec.free_mask();
    let eps = spec.eps(tol);
    for k in (0..m).filter(|k| free & (1 << k) != 0) {
        for rest in submasks(free & !(1 << k)) {
            let a = table.get(rest | (1 << k));
            let b = table.get(rest);
            for (x, y) in [(a, b), (b, a)] {
                let gain = x[k] - y[k];
                for l in (0..m).filter(|&l| l != k) {
                    let dl = x[l] - y[l];
                    if gain > eps && dl > eps {
                        return Ok(false);
                    }
                    if gain.abs() <= eps && dl.abs() > eps {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Sup-inf and inf-sup of `Σ_{i∈A} V_i` with `A` choosing first or last.
fn coalition_bounds(table: &PayoffTable, free: u32, coalition: u32) -> (f64, f64) {
    let ours = free & coalition;
    let theirs = free & !coalition;
    let sum = |mask: u32| -> f64 {
        let v = table.get(mask);
        (0..v.len()).filter(|i| coalition & (1 << i) != 0).map(|i| v[i]).sum()
    };
    let lower = submasks(ours)
        .map(|a| submasks(theirs).map(|b| sum(a | b)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = submasks(theirs)
        .map(|b| submasks(ours).map(|a| sum(a | b)).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    (lower, upper)
}

/// Per-player value when sup-inf equals inf-sup for every player.
pub fn value(spec: &GameSpec, tol: f64) -> Result<Option<Vec<f64>>> {
    let m = spec.players();
    check_cap(m, VALUE_CAP)?;
    let table = PayoffTable::build(spec, tol)?;
    let free = spec.free_mask();
    let eps = spec.eps(tol);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let (lo, hi) = coalition_bounds(&table, free, 1 << k);
        if (hi - lo).abs() > eps {
            return Ok(None);
        }
        out.push(lo);
    }
    Ok(Some(out))
}

/// Value of a coalition `A` (0-based players) playing jointly against the rest.
pub fn coalition_value(spec: &GameSpec, coalition: &[usize], tol: f64) -> Result<Option<f64>> {
    let m = spec.players();
    check_cap(m, VALUE_CAP)?;
    if coalition.is_empty() {
        return Err(Error::InvalidGame("coalition must be nonempty".into()));
    }
    if let Some(&i) = coalition.iter().find(|&&i| i >= m) {
        return Err(Error::InvalidGame(format!("coalition member {i} out of range")));
    }
    let table = PayoffTable::build(spec, tol)?;
    let mask = coalition.iter().fold(0u32, |acc, &i| acc | (1 << i));
    let (lo, hi) = coalition_bounds(&table, spec.free_mask(), mask);
    let eps = spec.eps(tol) * coalition.len() as f64;
    Ok(((hi - lo).abs() <= eps).then_some(lo))
}

/// Zero-sum extension by a non-exercising dummy player placed at index 0.
pub fn dummy_extension(spec: &GameSpec, tol: f64) -> Result<GameSpec> {
    let class = classify(&spec.g, tol)?;
    if !class.is_k0prime {
        return Err(Error::HypothesisViolated("G must be a K0' matrix".into()));
    }
    let m = spec.players();
    let sums = spec.g.column_sums();
    let eps = tol * spec.g.max_abs();
    if let Some(j) = (0..m).find(|&j| sums[j] < -eps) {
        return Err(Error::ColumnSumNegative {
            column: j,
            sum: sums[j],
        });
    }
    let n = m + 1;
    let mut data = vec![0.0; n * n];
    for j in 0..m {
        data[j + 1] = -sums[j];
    }
    for i in 0..m {
        for j in 0..m {
            data[(i + 1) * n + j + 1] = spec.g.get(i, j);
        }
    }
    let prepend = |v: &[f64]| {
        let mut out = vec![-v.iter().sum::<f64>()];
        out.extend_from_slice(v);
        out
    };
    let ext = GameSpec {
        x: prepend(&spec.x),
        p: prepend(&spec.p),
        g: SquareMatrix::from_row_major(n, data)?,
        locked: vec![0],
    };
    ext.validate()?;
    Ok(ext)
}

/// `π^{G⁻¹}_{O(X)}(P)`: projection of `P` onto `{x ≥ X}` in the `G⁻¹` metric.
pub fn projection_sol(spec: &GameSpec, tol: f64) -> Result<Vec<f64>> {
    if !spec.g.is_symmetric_pd(tol) {
        return Err(Error::NotSymmetricPD);
    }
    let ginv = spec.g.inverse().ok_or(Error::NotSymmetricPD)?;
    weighted_orthant_projection(&ginv, &spec.p, &spec.x, tol.min(1e-12))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub nash_profiles: Vec<StrategyProfile>,
    pub nash_payoff: Option<Vec<f64>>,
    pub optimal_profiles: Vec<StrategyProfile>,
    pub value: Option<Vec<f64>>,
    pub wuc: bool,
}

pub fn equilibrium_report(spec: &GameSpec, tol: f64) -> Result<EquilibriumReport> {
    let m = spec.players();
    check_cap(m, VALUE_CAP)?;
    let nash_profiles = enumerate_nash(spec, tol)?;
    let table = PayoffTable::build(spec, tol)?;
    let free = spec.free_mask();
    let eps = spec.eps(tol);
    let nash_payoff = match sol(spec, tol) {
        Ok(v) => Some(v),
        Err(Error::NotCovered) => {
            // Report the common payoff when all equilibria happen to agree.
            let mut payoffs = nash_profiles.iter().map(|s| table.get(s.exercise_mask()));
            payoffs.next().and_then(|first| {
                payoffs
                    .all(|v| v.iter().zip(first).all(|(a, b)| (a - b).abs() <= eps))
                    .then(|| first.to_vec())
            })
        }
        Err(e) => return Err(e),
    };
    let optimal_profiles = nash_profiles
        .iter()
        .filter(|s| optimal_in_table(&table, m, free, s.exercise_mask(), eps))
        .cloned()
        .collect();
    Ok(EquilibriumReport {
        nash_profiles,
        nash_payoff,
        optimal_profiles,
        value: value(spec, tol)?,
        wuc: wuc_check(spec, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{gen_k_matrix, DEFAULT_TOL};
    use approx::assert_relative_eq;

    const TOL: f64 = DEFAULT_TOL;

    fn example() -> GameSpec {
        let g = SquareMatrix::from_rows(&[[1.0, -0.5], [-0.5, 1.0]]).unwrap();
        GameSpec::new(vec![2.0, 0.0], vec![0.0, 3.0], g).unwrap()
    }

    fn close(a: &[f64], b: &[f64], eps: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
    }

    #[test]
    fn payoff_examples() {
        let spec = example();
        let none = payoff(&spec, &StrategyProfile::new(vec![1, 1]).unwrap(), TOL).unwrap();
        assert_eq!(none.v, vec![0.0, 3.0]);
        assert_eq!(none.a, Some(vec![0.0, 0.0]));
        let one = payoff(&spec, &StrategyProfile::new(vec![0, 1]).unwrap(), TOL).unwrap();
        assert_eq!(one.v, vec![2.0, 2.0]);
        assert_eq!(one.a, Some(vec![2.0, 0.0]));

        let single = GameSpec::new(vec![5.0], vec![3.0], SquareMatrix::identity(1)).unwrap();
        let v = payoff(&single, &StrategyProfile::new(vec![0]).unwrap(), TOL).unwrap();
        assert_eq!(v.v, vec![5.0]);
    }

    #[test]
    fn singular_full_exercise_uses_x() {
        let g = SquareMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let spec = GameSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], g).unwrap();
        let out = payoff(&spec, &StrategyProfile::new(vec![0, 0]).unwrap(), TOL).unwrap();
        assert_eq!(out.v, vec![1.0, 1.0]);
        assert_eq!(out.a, None);
    }

    #[test]
    fn singular_proper_submatrix_is_an_error() {
        let g = SquareMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let spec = GameSpec::new(vec![0.0; 3], vec![0.0; 3], g).unwrap();
        assert_eq!(
            payoff_for_set(&spec, &[0, 1], TOL),
            Err(Error::SingularSubmatrix { players: vec![0, 1] })
        );
    }

    #[test]
    fn nash_examples() {
        let single = GameSpec::new(vec![5.0], vec![3.0], SquareMatrix::from_rows(&[[2.0]]).unwrap()).unwrap();
        assert_eq!(enumerate_nash(&single, TOL).unwrap(), vec![StrategyProfile { s: vec![0] }]);

        let spec = example();
        let nash = enumerate_nash(&spec, TOL).unwrap();
        assert_eq!(nash, vec![StrategyProfile { s: vec![0, 1] }]);

        let g = SquareMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let sing = GameSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], g).unwrap();
        assert!(enumerate_nash(&sing, TOL).unwrap().contains(&StrategyProfile { s: vec![0, 0] }));
    }

    #[test]
    fn sol_examples() {
        for (x, p) in [(5.0, 3.0), (-1.0, 2.0), (4.0, 4.0)] {
            let s = GameSpec::new(vec![x], vec![p], SquareMatrix::from_rows(&[[2.0]]).unwrap()).unwrap();
            assert_eq!(sol(&s, TOL).unwrap(), vec![f64::max(x, p)]);
        }
        let v = sol(&example(), TOL).unwrap();
        assert!(close(&v, &[2.0, 2.0], 1e-12));

        let g = SquareMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let sing = GameSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], g).unwrap();
        assert_eq!(sol(&sing, TOL).unwrap(), vec![1.0, 1.0]);

        let bad = GameSpec::new(vec![0.0; 2], vec![0.0; 2], SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(sol(&bad, TOL), Err(Error::NotCovered));
    }

    #[test]
    fn canonical_examples() {
        let single = GameSpec::new(vec![5.0], vec![3.0], SquareMatrix::identity(1)).unwrap();
        assert_eq!(canonical_equilibrium(&single, TOL).unwrap().s, vec![0]);
        assert_eq!(canonical_equilibrium(&example(), TOL).unwrap().s, vec![0, 1]);
        let g = gen_k_matrix(3, 3, false);
        let tie = GameSpec::new(vec![1.0, -2.0, 0.5], vec![1.0, -2.0, 0.5], g).unwrap();
        assert_eq!(canonical_equilibrium(&tie, TOL).unwrap().s, vec![0, 0, 0]);
    }

    #[test]
    fn optimality_examples() {
        let spec = example();
        assert!(is_optimal_equilibrium(&spec, &StrategyProfile { s: vec![0, 1] }, TOL).unwrap());
        assert!(!is_optimal_equilibrium(&spec, &StrategyProfile { s: vec![1, 1] }, TOL).unwrap());

        // Zero-sum saddle: singular G with zero column sums and ΣX = ΣP.
        let g = SquareMatrix::from_rows(&[[0.25, -0.25], [-0.25, 0.25]]).unwrap();
        let zs = GameSpec::new(vec![1.0, -1.0], vec![0.0, 0.0], g).unwrap();
        let saddle = canonical_equilibrium(&zs, TOL).unwrap();
        assert!(is_optimal_equilibrium(&zs, &saddle, TOL).unwrap());
    }

    #[test]
    fn wuc_examples() {
        for seed in 0..10 {
            let g = gen_k_matrix(seed, 4, false);
            let spec = GameSpec::new(vec![0.3, -1.0, 2.0, 0.0], vec![1.0, 0.5, -0.2, 0.0], g).unwrap();
            assert!(wuc_check(&spec, TOL).unwrap());
        }
        // Positive G_lk: player k exercising with X_k > P_k raises player l too.
        let g = SquareMatrix::from_rows(&[[1.0, 0.0], [0.5, 1.0]]).unwrap();
        let spec = GameSpec::new(vec![1.0, 0.0], vec![0.0, 0.0], g).unwrap();
        assert!(!wuc_check(&spec, TOL).unwrap());
        let single = GameSpec::new(vec![1.0], vec![0.0], SquareMatrix::identity(1)).unwrap();
        assert!(wuc_check(&single, TOL).unwrap());
    }

    #[test]
    fn value_and_coalitions() {
        let spec = example();
        let v = value(&spec, TOL).unwrap().unwrap();
        assert!(close(&v, &sol(&spec, TOL).unwrap(), 1e-9));
        assert_relative_eq!(coalition_value(&spec, &[0, 1], TOL).unwrap().unwrap(), 4.0, epsilon = 1e-12);
        for (k, vk) in v.iter().enumerate() {
            assert_relative_eq!(coalition_value(&spec, &[k], TOL).unwrap().unwrap(), *vk, epsilon = 1e-12);
        }
        let single = GameSpec::new(vec![1.0], vec![3.0], SquareMatrix::identity(1)).unwrap();
        assert_eq!(value(&single, TOL).unwrap(), Some(vec![3.0]));
    }

    #[test]
    fn dummy_extension_example() {
        let ext = dummy_extension(&example(), TOL).unwrap();
        assert_eq!(ext.x, vec![-2.0, 2.0, 0.0]);
        assert_eq!(ext.p, vec![-3.0, 0.0, 3.0]);
        assert_eq!(ext.g.row(0), &[0.0, -0.5, -0.5]);
        assert_eq!(ext.locked, vec![0]);
        for mask in 0..4u32 {
            let v = payoff_mask(&ext, mask << 1, TOL).unwrap().v;
            assert!(v.iter().sum::<f64>().abs() < 1e-12);
        }
        assert!(payoff_mask(&ext, 1, TOL).is_err());
        let one = GameSpec::new(vec![1.0], vec![2.0], SquareMatrix::identity(1)).unwrap();
        let ext1 = dummy_extension(&one, TOL).unwrap();
        assert_eq!(ext1.players(), 2);
        assert!(enumerate_nash(&ext1, TOL).unwrap().iter().all(|s| s.s[0] == 1));

        let neg = GameSpec::new(vec![0.0; 2], vec![0.0; 2], SquareMatrix::from_rows(&[[1.0, -2.0], [-0.1, 1.0]]).unwrap()).unwrap();
        assert!(matches!(dummy_extension(&neg, TOL), Err(Error::ColumnSumNegative { column: 1, .. })));
    }

    #[test]
    fn projection_examples() {
        assert!(close(&projection_sol(&example(), TOL).unwrap(), &[2.0, 2.0], 1e-10));
        let g = SquareMatrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let interior = GameSpec::new(vec![0.0, 1.0], vec![1.0, 2.0], g.clone()).unwrap();
        assert!(close(&projection_sol(&interior, TOL).unwrap(), &[1.0, 2.0], 1e-12));
        let same = GameSpec::new(vec![1.0, 2.0], vec![1.0, 2.0], g).unwrap();
        assert!(close(&projection_sol(&same, TOL).unwrap(), &[1.0, 2.0], 1e-12));
        let ns = GameSpec::new(vec![0.0; 2], vec![0.0; 2], SquareMatrix::from_rows(&[[1.0, -1.0], [0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(projection_sol(&ns, TOL), Err(Error::NotSymmetricPD));
    }

    #[test]
    fn report_is_consistent() {
        let r = equilibrium_report(&example(), TOL).unwrap();
        assert_eq!(r.nash_profiles, r.optimal_profiles);
        assert!(r.wuc);
        assert!(close(r.value.as_ref().unwrap(), r.nash_payoff.as_ref().unwrap(), 1e-9));
    }

    #[test]
    fn lexicographic_order() {
        let order: Vec<Vec<u8>> = lexicographic_masks(2).map(|m| StrategyProfile::from_mask(2, m).s).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn rejects_bad_specs() {
        let g = SquareMatrix::identity(2);
        assert!(GameSpec::new(vec![0.0], vec![0.0, 0.0], g.clone()).is_err());
        let neg = SquareMatrix::from_rows(&[[-1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(GameSpec::new(vec![0.0; 2], vec![0.0; 2], neg), Err(Error::InvalidGame(_))));
        assert!(StrategyProfile::new(vec![0, 2]).is_err());
    }
}
