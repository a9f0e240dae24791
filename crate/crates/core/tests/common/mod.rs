#![allow(dead_code)]

use affine_games::SquareMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Positive quotients with the requested total.
pub fn alpha_with_sum(rng: &mut ChaCha8Rng, m: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|a| a * total / s).collect()
}

/// A singular Z-matrix whose columns sum to zero, optionally with rows
/// rescaled by a positive diagonal. Returns the matrix together with a
/// positive left null vector computed in closed form.
pub fn singular_k0prime(rng: &mut ChaCha8Rng, m: usize, row_scaled: bool) -> (SquareMatrix, Vec<f64>) {
    let mut a = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut col = 0.0;
        for (i, row) in a.iter_mut().enumerate() {
            if i != j {
                let v = rng.gen_range(0.1..1.0);
                row[j] = -v;
                col += v;
            }
        }
        a[j][j] = col;
    }
    let mut v = vec![1.0; m];
    if row_scaled {
        for (i, row) in a.iter_mut().enumerate() {
            let r: f64 = rng.gen_range(0.5..2.0);
            row.iter_mut().for_each(|x| *x *= r);
            v[i] = 1.0 / r;
        }
    }
    (SquareMatrix::from_rows(&a).unwrap(), v)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
