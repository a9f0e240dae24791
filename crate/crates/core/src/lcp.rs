//! Linear complementarity problems `LCP(q, M)`: find `z ≥ 0` with
//! `w = q + Mz ≥ 0` and `zᵀw = 0`.
//!
//! Two independent solvers are provided. [`solve_enum`] walks supports in a
//! canonical order and is the reference; [`solve_lemke`] is complementary
//! pivoting with a covering vector of ones and lexicographic ratio tests.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{
    minor_sign, positive_left_null, MinorSign, NullCertificate, NullSearch, SquareMatrix,
    ENUMERATION_CAP,
};
use crate::projection::{minimize_over_orthant, weighted_orthant_projection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpProblem {
    pub q: Vec<f64>,
    #[serde(rename = "M")]
    pub m: SquareMatrix,
}

impl LcpProblem {
    pub fn new(q: Vec<f64>, m: SquareMatrix) -> Result<Self> {
        if q.len() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { q, m })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Tolerance scaled by the magnitude of `q`.
    pub fn eps(&self, tol: f64) -> f64 {
        tol * (1.0 + norm_inf(&self.q))
    }

    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        self.m
            .mul_vec(z)
            .iter()
            .zip(&self.q)
            .map(|(a, b)| a + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpSolution {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub support: Vec<usize>,
}

impl LcpSolution {
    fn from_z(p: &LcpProblem, mut z: Vec<f64>, zero_on: &[usize]) -> Self {
        z.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut w = p.residual(&z);
        for &i in zero_on {
            w[i] = 0.0;
        }
        w.iter_mut().for_each(|v| *v = v.max(0.0));
        let support = (0..z.len()).filter(|&i| z[i] > 0.0).collect();
        Self { z, w, support }
    }
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Checks the solution invariants: `w = q + Mz`, nonnegativity,
/// complementarity and support consistency, all at `tol` scaled by `|q|∞`.
pub fn verify_solution(p: &LcpProblem, sol: &LcpSolution, tol: f64) -> bool {
    let m = p.dim();
    if sol.z.len() != m || sol.w.len() != m {
        return false;
    }
    let eps = p.eps(tol) * (1.0 + p.m.max_abs() * (1.0 + norm_inf(&sol.z)));
    let r = p.residual(&sol.z);
    let residual_ok = r.iter().zip(&sol.w).all(|(a, b)| (a - b).abs() <= eps);
    let sign_ok = sol.z.iter().chain(&sol.w).all(|&v| v >= -eps);
    let comp: f64 = sol.z.iter().zip(&sol.w).map(|(a, b)| a * b).sum();
    let support_ok = sol.support.iter().all(|&i| i < m && sol.w[i] <= eps);
    residual_ok && sign_ok && comp.abs() <= eps && support_ok
}

/// Support enumeration: subsets by increasing cardinality, then
/// lexicographically. Returns the first acceptable support, or `None`.
pub fn solve_enum(p: &LcpProblem, tol: f64) -> Result<Option<LcpSolution>> {
    solve_enum_capped(p, tol, ENUMERATION_CAP)
}

pub fn solve_enum_capped(p: &LcpProblem, tol: f64, cap: usize) -> Result<Option<LcpSolution>> {
    Ok(enumerate_supports(p, tol, cap, true)?.into_iter().next())
}

/// Every acceptable support, in canonical order.
pub fn solve_enum_all(p: &LcpProblem, tol: f64) -> Result<Vec<LcpSolution>> {
    enumerate_supports(p, tol, ENUMERATION_CAP, false)
}

fn enumerate_supports(
    p: &LcpProblem,
    tol: f64,
    cap: usize,
    first_only: bool,
) -> Result<Vec<LcpSolution>> {
    let m = p.dim();
    if m > cap {
        return Err(Error::DimensionTooLarge { m, cap });
    }
    let eps = p.eps(tol);
    let mut found = Vec::new();
    for k in 0..=m {
        for s in (0..m).combinations(k) {
            let mut z = vec![0.0; m];
            if k > 0 {
                let sub = p.m.principal(&s);
                if minor_sign(&sub, tol).1 == MinorSign::Zero {
                    continue;
                }
                let rhs: Vec<f64> = s.iter().map(|&i| -p.q[i]).collect();
                let Some(zs) = sub.solve(&rhs) else { continue };
                if zs.iter().any(|&v| v < -eps) {
                    continue;
                }
                for (&i, v) in s.iter().zip(zs) {
                    z[i] = v;
                }
            }
            let w = p.residual(&z);
            let feasible = (0..m).all(|i| s.contains(&i) || w[i] >= -eps);
            if feasible {
                found.push(LcpSolution::from_z(p, z, &s));
                if first_only {
                    return Ok(found);
                }
            }
        }
    }
    Ok(found)
}

/// Lemke's complementary pivoting with covering vector `d = 1`.
pub fn solve_lemke(p: &LcpProblem, tol: f64) -> Result<LcpSolution> {
    let m = p.dim();
    let eps = p.eps(tol);
    if p.q.iter().all(|&v| v >= -eps) {
        return Ok(LcpSolution::from_z(p, vec![0.0; m], &[]));
    }

    // Columns: w (0..m), z (m..2m), z0 (2m), rhs (2m+1).
    let width = 2 * m + 2;
    let z0 = 2 * m;
    let rhs = 2 * m + 1;
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        t[i * width + i] = 1.0;
        for j in 0..m {
            t[i * width + m + j] = -p.m.get(i, j);
        }
        t[i * width + z0] = -1.0;
        t[i * width + rhs] = p.q[i];
    }
    let mut basis: Vec<usize> = (0..m).collect();

    let lex_key = |t: &[f64], r: usize, scale: f64| -> Vec<f64> {
        std::iter::once(t[r * width + rhs])
            .chain((0..m).map(|j| t[r * width + j]))
            .map(|v| v / scale)
            .collect()
    };

    // Initial pivot: the row with the lexicographically smallest (q, B⁻¹) row.
    let first = (0..m)
        .min_by(|&a, &b| lex_cmp(&lex_key(&t, a, 1.0), &lex_key(&t, b, 1.0), eps))
        .expect("m > 0");
    pivot(&mut t, width, m, first, z0);
    let mut leaving = basis[first];
    basis[first] = z0;

    let limit = 10usize.saturating_mul(1usize.checked_shl(m as u32).unwrap_or(usize::MAX));
    for _ in 0..limit {
        let entering = if leaving < m { leaving + m } else { leaving - m };
        let piv_eps = 1e-12 * (1.0 + (0..m).fold(0.0_f64, |a, r| a.max(t[r * width + entering].abs())));
        let candidates: Vec<usize> = (0..m).filter(|&r| t[r * width + entering] > piv_eps).collect();
        if candidates.is_empty() {
            return Err(Error::RayTermination);
        }
        let min_ratio = candidates
            .iter()
            .map(|&r| t[r * width + rhs] / t[r * width + entering])
            .fold(f64::INFINITY, f64::min);
        let z0_row = candidates.iter().copied().find(|&r| {
            basis[r] == z0 && t[r * width + rhs] / t[r * width + entering] <= min_ratio + eps
        });
        let row = match z0_row {
            Some(r) => r,
            None => candidates
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    lex_cmp(
                        &lex_key(&t, a, t[a * width + entering]),
                        &lex_key(&t, b, t[b * width + entering]),
                        eps,
                    )
                })
                .expect("nonempty"),
        };
        pivot(&mut t, width, m, row, entering);
        leaving = basis[row];
        basis[row] = entering;
        if leaving == z0 {
            let mut z = vec![0.0; m];
            for (r, &b) in basis.iter().enumerate() {
                if (m..2 * m).contains(&b) {
                    z[b - m] = t[r * width + rhs];
                }
            }
            let zero_on: Vec<usize> = basis
                .iter()
                .filter(|&&b| (m..2 * m).contains(&b))
                .map(|&b| b - m)
                .collect();
            return Ok(LcpSolution::from_z(p, z, &zero_on));
        }
    }
    Err(Error::CycleLimit { limit })
}

fn lex_cmp(a: &[f64], b: &[f64], eps: f64) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > eps {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let pv = t[row * width + col];
    for j in 0..width {
        t[row * width + j] /= pv;
    }
    for r in 0..m {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f != 0.0 {
            for j in 0..width {
                t[r * width + j] -= f * t[row * width + j];
            }
        }
    }
}

/// Outcome of the singular-case solvability test.
#[derive(Debug, Clone, PartialEq)]
pub enum P0Solvability {
    Solvable(LcpSolution),
    Unsolvable(NullCertificate),
}

/// For `M` in P₀′: nonsingular problems are always solvable; singular ones
/// are solvable iff `vᵀq ≥ 0` for the positive left null vector `v`.
pub fn solvability_p0prime(p: &LcpProblem, tol: f64) -> Result<P0Solvability> {
    match minor_sign(&p.m, tol).1 {
        MinorSign::Negative => Err(Error::NotCovered),
        MinorSign::Positive => solve_enum(p, tol)?
            .map(P0Solvability::Solvable)
            .ok_or(Error::NoSolution),
        MinorSign::Zero => match positive_left_null(&p.m, tol)? {
            NullSearch::Found(cert) => {
                let vq: f64 = cert.v.iter().zip(&p.q).map(|(a, b)| a * b).sum();
                if vq >= -p.eps(tol) {
                    solve_enum(p, tol)?
                        .map(P0Solvability::Solvable)
                        .ok_or(Error::NoSolution)
                } else {
                    Ok(P0Solvability::Unsolvable(cert))
                }
            }
            NullSearch::NotPositive(v) => Err(Error::CertificateUnavailable(format!(
                "left null vector {v:?} is not strictly positive"
            ))),
            NullSearch::Multidimensional(d) => Err(Error::CertificateUnavailable(format!(
                "left null space has dimension {d}"
            ))),
        },
    }
}

/// Checks the equivalent characterizations of an LCP solution:
/// `z = π(z − w)` onto the orthant, `wᵀ(y − z) ≥ 0` over sampled `y ≥ 0`,
/// and for symmetric positive definite `M` the weighted projections
/// `z = π^M(−M⁻¹q)` and `w = π^{M⁻¹}(q)`.
pub fn verify_projection_characterization(p: &LcpProblem, sol: &LcpSolution, tol: f64) -> bool {
    let m = p.dim();
    if sol.z.len() != m || sol.w.len() != m {
        return false;
    }
    let eps = tol * (1.0 + norm_inf(&p.q) + norm_inf(&sol.z) + norm_inf(&sol.w));

    let fixed_point = (0..m).all(|i| ((sol.z[i] - sol.w[i]).max(0.0) - sol.z[i]).abs() <= eps);
    if !fixed_point {
        return false;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let span = 1.0 + norm_inf(&sol.z);
    let mut samples: Vec<Vec<f64>> = vec![vec![0.0; m]];
    for i in 0..m {
        let mut y = sol.z.clone();
        y[i] += 1.0;
        samples.push(y);
    }
    for _ in 0..64 {
        samples.push((0..m).map(|_| rng.gen::<f64>() * 2.0 * span).collect());
    }
    let vi_ok = samples.iter().all(|y| {
        let s: f64 = (0..m).map(|i| sol.w[i] * (y[i] - sol.z[i])).sum();
        s >= -eps * (1.0 + norm_inf(y))
    });
    if !vi_ok {
        return false;
    }

    if p.m.is_symmetric_pd(1e-12) {
        let zero = vec![0.0; m];
        let Ok(zp) = minimize_over_orthant(&p.m, &p.q, &zero, 1e-12) else {
            return false;
        };
        let Some(minv) = p.m.inverse() else {
            return false;
        };
        let Ok(wp) = weighted_orthant_projection(&minv, &p.q, &zero, 1e-12) else {
            return false;
        };
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps);
        if !close(&zp.x, &sol.z) || !close(&wp, &sol.w) {
            return false;
        }
    }
    true
}
