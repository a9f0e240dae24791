//! Primal active-set minimizer for strictly convex quadratics over a
//! shifted nonnegative orthant `{x : x ≥ lower}`.
//!
//! This is the independent route used to cross-check the complementarity
//! solvers: weighted projections onto orthants are computed here without
//! touching the LCP code.

use crate::error::{Error, Result};
use crate::matrices::SquareMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthantQpSolution {
    pub x: Vec<f64>,
    /// Indices held at their lower bound.
    pub active: Vec<usize>,
    pub iterations: usize,
}

/// Minimizes `½ xᵀHx + cᵀx` subject to `x ≥ lower`, `H` symmetric positive definite.
pub fn minimize_over_orthant(
    h: &SquareMatrix,
    c: &[f64],
    lower: &[f64],
    tol: f64,
) -> Result<OrthantQpSolution> {
    let m = h.dim();
    if c.len() != m || lower.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: c.len().min(lower.len()),
        });
    }
    if !h.is_symmetric_pd(tol) {
        return Err(Error::NotSymmetricPD);
    }
    let scale = 1.0
        + h.max_abs()
        + c.iter().chain(lower).fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let eps = tol * scale;

    let mut x = lower.to_vec();
    let mut active = vec![true; m];
    let max_iter = 10 * (m + 1) * (m + 1);

    for iter in 0..max_iter {
        let free: Vec<usize> = (0..m).filter(|&i| !active[i]).collect();
        let mut y = x.clone();
        if !free.is_empty() {
            let rhs: Vec<f64> = free
                .iter()
                .map(|&i| {
                    -c[i]
                        - (0..m)
                            .filter(|&j| active[j])
                            .map(|j| h.get(i, j) * x[j])
                            .sum::<f64>()
                })
                .collect();
            let sol = h.principal(&free).solve(&rhs).ok_or(Error::NotSymmetricPD)?;
            for (k, &i) in free.iter().enumerate() {
                y[i] = sol[k];
            }
        }

        // Ratio test toward the subproblem minimizer.
        let mut step = 1.0;
        let mut blocking = None;
        for &i in &free {
            if y[i] < lower[i] - eps {
                let t = (x[i] - lower[i]) / (x[i] - y[i]);
                if t < step {
                    step = t;
                    blocking = Some(i);
                }
            }
        }
        if let Some(b) = blocking {
            for i in 0..m {
                x[i] += step * (y[i] - x[i]);
            }
            x[b] = lower[b];
            active[b] = true;
            continue;
        }
        x = y;
        for &i in &free {
            if x[i] < lower[i] {
                x[i] = lower[i];
            }
        }

        let grad: Vec<f64> = h.mul_vec(&x).iter().zip(c).map(|(a, b)| a + b).collect();
        let release = (0..m)
            .filter(|&i| active[i] && grad[i] < -eps)
            .min_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        match release {
            Some(j) => active[j] = false,
            None => {
                return Ok(OrthantQpSolution {
                    x,
                    active: (0..m).filter(|&i| active[i]).collect(),
                    iterations: iter + 1,
                })
            }
        }
    }
    Err(Error::CycleLimit { limit: max_iter })
}

/// Projection of `point` onto `{x ≥ lower}` under the inner product
/// `⟨x, y⟩ = xᵀ W y`, `W` symmetric positive definite.
pub fn weighted_orthant_projection(
    weight: &SquareMatrix,
    point: &[f64],
    lower: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    // ½ (x − p)ᵀW(x − p) = ½ xᵀWx − (Wp)ᵀx + const
    let c: Vec<f64> = weight.mul_vec(point).iter().map(|v| -v).collect();
    minimize_over_orthant(weight, &c, lower, tol).map(|s| s.x)
}
