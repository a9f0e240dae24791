//! Redistribution games: affine games whose matrix `D̂` is generated by
//! redistribution quotients `α` with `α_i > 0` and `Σα ≤ 1`.
//!
//! `D̂_ii = α_i(1 − α_i)`, `D̂_ij = −α_i α_j`, and `det D̂ = (1 − Σα) Πα`.
//! `Σα = 1` gives the singular, zero-sum case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{SquareMatrix, DEFAULT_TOL};
use crate::single_period::StrategyProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedistributionSpec {
    pub alpha: Vec<f64>,
}

impl RedistributionSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        validate_alpha(&alpha, DEFAULT_TOL)?;
        Ok(Self { alpha })
    }

    pub fn sum_alpha(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn dhat(&self) -> SquareMatrix {
        build_dhat(&self.alpha)
    }

    /// `D = D̂⁻¹` in closed form; `None` in the singular case `Σα = 1`.
    pub fn d(&self) -> Option<SquareMatrix> {
        let slack = 1.0 - self.sum_alpha();
        if slack <= DEFAULT_TOL {
            return None;
        }
        let m = self.alpha.len();
        let mut data = vec![1.0 / slack; m * m];
        for (i, a) in self.alpha.iter().enumerate() {
            data[i * m + i] += 1.0 / a;
        }
        SquareMatrix::from_row_major(m, data).ok()
    }

    /// `w_k(E) = α_k / (1 − Σ_{i∈E} α_i)`.
    pub fn weight(&self, k: usize, exercising: &[usize]) -> Result<f64> {
        let denom = 1.0 - exercising.iter().map(|&i| self.alpha[i]).sum::<f64>();
        if denom <= DEFAULT_TOL {
            return Err(Error::WeightSingular {
                players: exercising.to_vec(),
            });
        }
        Ok(self.alpha[k] / denom)
    }

    /// Model-level determinant `(1 − Σα) Πα`.
    pub fn det_closed_form(&self) -> f64 {
        (1.0 - self.sum_alpha()) * self.alpha.iter().product::<f64>()
    }
}

fn validate_alpha(alpha: &[f64], tol: f64) -> Result<()> {
    if alpha.is_empty() {
        return Err(Error::InvalidAlpha("alpha is empty".into()));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some((i, a)) = alpha.iter().enumerate().find(|(_, &a)| a <= tol) {
        return Err(Error::InvalidAlpha(format!("alpha[{i}] = {a} is not positive")));
    }
    let s: f64 = alpha.iter().sum();
    if s > 1.0 + tol {
        return Err(Error::InvalidAlpha(format!("sum of alpha is {s} > 1")));
    }
    Ok(())
}

fn build_dhat(alpha: &[f64]) -> SquareMatrix {
    let m = alpha.len();
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = if i == j {
                alpha[i] * (1.0 - alpha[i])
            } else {
                -alpha[i] * alpha[j]
            };
        }
    }
    SquareMatrix::from_row_major(m, data).expect("finite alpha")
}

pub fn dhat_from_alpha(alpha: &[f64]) -> Result<SquareMatrix> {
    validate_alpha(alpha, DEFAULT_TOL)?;
    Ok(build_dhat(alpha))
}

/// Closed-form redistribution payoff: exercisers get `X_k`, the others
/// `P_k − w_k(E) Σ_{i∈E}(X_i − P_i)`.
pub fn grg_payoff(x: &[f64], p: &[f64], alpha: &[f64], s: &StrategyProfile) -> Result<Vec<f64>> {
    let spec = RedistributionSpec::new(alpha.to_vec())?;
    let m = alpha.len();
    for v in [x, p, &s.s.iter().map(|&b| b as f64).collect::<Vec<_>>()[..]] {
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
    }
    let e = s.exercising();
    if e.len() == m {
        return Ok(x.to_vec());
    }
    let shortfall: f64 = e.iter().map(|&i| x[i] - p[i]).sum();
    let mut v = p.to_vec();
    for k in 0..m {
        if s.s[k] == 0 {
            v[k] = x[k];
        } else if !e.is_empty() {
            v[k] = p[k] - spec.weight(k, &e)? * shortfall;
        }
    }
    Ok(v)
}

/// `⟨x, y⟩^D = Σ x_i y_i / α_i + (Σx)(Σy) / (1 − Σα)`.
pub fn d_inner_product(alpha: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
    validate_alpha(alpha, DEFAULT_TOL)?;
    let slack = 1.0 - alpha.iter().sum::<f64>();
    if slack <= DEFAULT_TOL {
        return Err(Error::InvalidAlpha("inner product requires sum of alpha < 1".into()));
    }
    if x.len() != alpha.len() || y.len() != alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            found: x.len().min(y.len()),
        });
    }
    let diag: f64 = x.iter().zip(y).zip(alpha).map(|((a, b), w)| a * b / w).sum();
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    Ok(diag + sx * sy / slack)
}

/// Built-in two-player instance used by the CLI and the demo.
pub fn grg_demo() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (vec![2.0, 0.0], vec![0.0, 3.0], vec![0.25, 0.25])
}
