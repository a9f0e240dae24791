//! Dense square matrices, principal-minor classification and the
//! subgame (Schur) reduction.
//!
//! Principal minors are evaluated with an LU factorization with partial
//! pivoting. A minor is compared against zero at `tol * scale`, where
//! `scale` is the product over the submatrix rows of the largest absolute
//! entry in that row. This keeps the comparison invariant under row scaling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute comparison tolerance, scaled by matrix magnitude.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest dimension for exhaustive principal-minor classification.
pub const CLASSIFY_CAP: usize = 16;
/// Largest dimension for subset or profile enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Dense row-major square matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct SquareMatrix {
    m: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Rows {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        rows: Vec<Vec<f64>>,
    },
    Alpha {
        alpha: Vec<f64>,
    },
}

impl TryFrom<MatrixJson> for SquareMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        match json {
            MatrixJson::Rows { m, rows } => {
                if let Some(m) = m {
                    if m != rows.len() {
                        return Err(Error::Ragged);
                    }
                }
                SquareMatrix::from_rows(&rows)
            }
            MatrixJson::Alpha { alpha } => crate::redistribution::dhat_from_alpha(&alpha),
        }
    }
}

impl From<SquareMatrix> for MatrixJson {
    fn from(mat: SquareMatrix) -> Self {
        MatrixJson::Rows {
            m: Some(mat.m),
            rows: mat.rows(),
        }
    }
}

impl SquareMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(m * m);
        for row in rows {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::Ragged);
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(m, data)
    }

    pub fn from_row_major(m: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty);
        }
        if data.len() != m * m {
            return Err(Error::Ragged);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { m, data })
    }

    pub fn identity(m: usize) -> Self {
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + i] = 1.0;
        }
        Self { m, data }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                data[j * m + i] = self.data[i * m + j];
            }
        }
        Self { m, data }
    }

    /// Principal submatrix on the given (ordered) indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { m: k, data }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.m);
        (0..self.m)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Computes `xᵀ M`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.m);
        let mut out = vec![0.0; self.m];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        let m = self.m;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let a = self.get(i, k);
                for j in 0..m {
                    data[i * m + j] += a * other.get(k, j);
                }
            }
        }
        SquareMatrix { m, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| (0..self.m).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = tol * self.max_abs().max(1.0);
        (0..self.m).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= scale))
    }

    /// Product over rows of the largest absolute entry; the magnitude
    /// reference for deciding whether a determinant is zero.
    pub fn row_scale(&self) -> f64 {
        (0..self.m)
            .map(|i| self.row(i).iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
            .product()
    }

    pub fn determinant(&self) -> f64 {
        Lu::factor(self).determinant()
    }

    /// Solves `M x = b`, or `None` when a pivot vanishes.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        Lu::factor(self).solve(b)
    }

    pub fn inverse(&self) -> Option<SquareMatrix> {
        let lu = Lu::factor(self);
        let m = self.m;
        let mut data = vec![0.0; m * m];
        let mut e = vec![0.0; m];
        for j in 0..m {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = lu.solve(&e)?;
            for i in 0..m {
                data[i * m + j] = col[i];
            }
        }
        Some(SquareMatrix { m, data })
    }

    /// Cholesky test for symmetric positive definiteness.
    pub fn is_symmetric_pd(&self, tol: f64) -> bool {
        if !self.is_symmetric(tol) {
            return false;
        }
        let m = self.m;
        let mut l = vec![0.0; m * m];
        let floor = tol * self.max_abs().max(f64::MIN_POSITIVE);
        for j in 0..m {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * m + k] * l[j * m + k];
            }
            if d <= floor {
                return false;
            }
            let d = d.sqrt();
            l[j * m + j] = d;
            for i in j + 1..m {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k];
                }
                l[i * m + j] = s / d;
            }
        }
        true
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &SquareMatrix) -> Self {
        let n = a.m;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Self { n, lu, perm, sign }
    }

    pub fn determinant(&self) -> f64 {
        (0..self.n).fold(self.sign, |acc, k| acc * self.lu[k * self.n + k])
    }

    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            let d = self.lu[i * n + i];
            if d == 0.0 {
                return None;
            }
            x[i] /= d;
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

/// `det(M_SS)` for a nonempty index set `S` (0-based).
pub fn principal_minor(m: &SquareMatrix, s: &[usize]) -> f64 {
    debug_assert!(!s.is_empty());
    m.principal(s).determinant()
}

/// Sign of a determinant relative to its magnitude reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinorSign {
    Negative,
    Zero,
    Positive,
}

/// Classifies `det(sub)` at `tol` times the submatrix row scale.
pub fn minor_sign(sub: &SquareMatrix, tol: f64) -> (f64, MinorSign) {
    let det = sub.determinant();
    let eps = tol * sub.row_scale();
    let sign = if det > eps {
        MinorSign::Positive
    } else if det < -eps {
        MinorSign::Negative
    } else {
        MinorSign::Zero
    };
    (det, sign)
}

/// Returns whether `M_SS` is nonsingular at the classification tolerance.
pub fn is_nonsingular(m: &SquareMatrix, s: &[usize], tol: f64) -> bool {
    s.is_empty() || minor_sign(&m.principal(s), tol).1 != MinorSign::Zero
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixClass {
    pub is_z: bool,
    pub is_p: bool,
    pub is_p0prime: bool,
    pub is_k: bool,
    pub is_k0prime: bool,
    pub has_positive_diagonal: bool,
    pub has_nonzero_proper_minors: bool,
    pub column_sums_nonneg: bool,
    /// Full determinant.
    pub det: f64,
    /// Whether the full determinant is zero at the tolerance.
    pub singular: bool,
}

pub fn classify(m: &SquareMatrix, tol: f64) -> Result<MatrixClass> {
    classify_capped(m, tol, CLASSIFY_CAP)
}

pub fn classify_capped(mat: &SquareMatrix, tol: f64, cap: usize) -> Result<MatrixClass> {
    let m = mat.dim();
    if m > cap {
        return Err(Error::DimensionTooLarge { m, cap });
    }
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut proper_positive = true;
    let mut proper_nonzero = true;
    let mut idx = Vec::with_capacity(m);
    for mask in 1..full {
        idx.clear();
        idx.extend((0..m).filter(|i| mask & (1 << i) != 0));
        let (_, sign) = minor_sign(&mat.principal(&idx), tol);
        match sign {
            MinorSign::Positive => {}
            MinorSign::Zero => {
                proper_positive = false;
                proper_nonzero = false;
            }
            MinorSign::Negative => proper_positive = false,
        }
    }
    let (det, det_sign) = minor_sign(mat, tol);

    let off_eps = tol * mat.max_abs();
    let is_z = (0..m).all(|i| (0..m).all(|j| i == j || mat.get(i, j) <= off_eps));
    let is_p = proper_positive && det_sign == MinorSign::Positive;
    let is_p0prime = proper_positive && det_sign != MinorSign::Negative;
    let has_positive_diagonal = (0..m).all(|i| mat.get(i, i) > off_eps);
    let column_sums_nonneg = mat.column_sums().iter().all(|&s| s >= -off_eps);

    Ok(MatrixClass {
        is_z,
        is_p,
        is_p0prime,
        is_k: is_p && is_z,
        is_k0prime: is_p0prime && is_z,
        has_positive_diagonal,
        has_nonzero_proper_minors: proper_nonzero,
        column_sums_nonneg,
        det,
        singular: det_sign == MinorSign::Zero,
    })
}

/// Eliminates player `i`: `G̃_jk = G_jk − G_ji G_ik / G_ii` on the
/// remaining indices, order preserved.
pub fn schur_reduce(mat: &SquareMatrix, i: usize, tol: f64) -> Result<SquareMatrix> {
    let m = mat.dim();
    assert!(i < m, "pivot index {i} out of range for dimension {m}");
    let pivot = mat.get(i, i);
    if pivot.abs() <= tol * mat.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroPivot { index: i });
    }
    if m == 1 {
        return Err(Error::Empty);
    }
    let rest: Vec<usize> = (0..m).filter(|&k| k != i).collect();
    let mut data = Vec::with_capacity((m - 1) * (m - 1));
    for &j in &rest {
        for &k in &rest {
            data.push(mat.get(j, k) - mat.get(j, i) * mat.get(i, k) / pivot);
        }
    }
    SquareMatrix::from_row_major(m - 1, data)
}

/// Strictly positive `v` with `vᵀM = 0`, normalized to unit max-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCertificate {
    pub v: Vec<f64>,
}

/// Outcome of the positive left-null search.
#[derive(Debug, Clone, PartialEq)]
pub enum NullSearch {
    Found(NullCertificate),
    /// The null space is one-dimensional but has mixed signs.
    NotPositive(Vec<f64>),
    /// Null spaces of dimension > 1 are not searched.
    Multidimensional(usize),
}

impl NullSearch {
    pub fn certificate(self) -> Option<NullCertificate> {
        match self {
            NullSearch::Found(c) => Some(c),
            _ => None,
        }
    }
}

pub fn positive_left_null(mat: &SquareMatrix, tol: f64) -> Result<NullSearch> {
    let m = mat.dim();
    let (det, sign) = minor_sign(mat, tol);
    if sign != MinorSign::Zero {
        return Err(Error::NotSingular { det });
    }
    let a = DMatrix::from_row_slice(m, m, mat.as_slice());
    let svd = a.svd(true, false);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let cut = (tol * m as f64).max(1e-12) * smax.max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..m).filter(|&k| sv[k] <= cut).collect();
    let dim = null.len().max(1);
    if dim > 1 {
        return Ok(NullSearch::Multidimensional(dim));
    }
    let k = if null.len() == 1 {
        null[0]
    } else {
        (0..m)
            .min_by(|&a, &b| sv[a].total_cmp(&sv[b]))
            .expect("nonempty")
    };
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let mut v: Vec<f64> = (0..m).map(|i| u[(i, k)]).collect();
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if vmax.abs() < vmin.abs() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let norm = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    v.iter_mut().for_each(|x| *x /= norm);
    if v.iter().all(|&x| x > tol) {
        Ok(NullSearch::Found(NullCertificate { v }))
    } else {
        Ok(NullSearch::NotPositive(v))
    }
}

/// Random K-matrix: unit diagonal, off-diagonals uniform in `[-c, 0]` with
/// `c = 0.9 / (m - 1)`, which makes every column strictly diagonally dominant.
pub fn gen_k_matrix(seed: u64, m: usize, require_nonneg_colsums: bool) -> SquareMatrix {
    assert!(m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = if m > 1 { 0.9 / (m - 1) as f64 } else { 0.0 };
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = if i == j { 1.0 } else { -c * rng.gen::<f64>() };
        }
    }
    if require_nonneg_colsums {
        // Shrinks the off-diagonal part of any column whose sum is negative.
        for j in 0..m {
            let off: f64 = (0..m).filter(|&i| i != j).map(|i| data[i * m + j]).sum();
            let diag = data[j * m + j];
            if diag + off < 0.0 {
                let f = diag / -off;
                for i in (0..m).filter(|&i| i != j) {
                    data[i * m + j] *= f;
                }
            }
        }
    }
    SquareMatrix { m, data }
}

/// Random symmetric positive definite matrix `AᵀA + 0.1 I`, `A` uniform in `[-1, 1]`.
pub fn gen_p_matrix(seed: u64, m: usize) -> SquareMatrix {
    assert!(m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let s: f64 = (0..m).map(|k| a[k * m + i] * a[k * m + j]).sum();
            data[i * m + j] = s + if i == j { 0.1 } else { 0.0 };
        }
    }
    SquareMatrix { m, data }
}
