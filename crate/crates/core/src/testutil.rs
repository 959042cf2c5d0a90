//! Shared helpers for unit tests.

use crate::dense::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| r.sample(StandardNormal)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn random_simplex(r: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| r.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Fourth-order finite difference of a scalar function at 0 with unit scale.
pub fn fd_directional(phi: impl Fn(f64) -> f64, order: usize) -> f64 {
    crate::fdcheck::derivative(phi, order, 1.0)
}
