//! Oracles shared by the integration tests. Nothing here calls into the
//! solver code it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use smoothaccel::dense::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn normal_matrix(r: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::new(m, n, normal_vec(r, m * n)).unwrap()
}

pub fn simplex(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|_| -r.random::<f64>().max(1e-300).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Directional derivatives of `t ↦ smax_μ(z + t u)` at 0, orders 1 to 4,
/// as cumulants of `u` under the softmax distribution scaled by `μ^{1−k}`.
pub fn smax_cumulants(z: &[f64], u: &[f64], mu: f64) -> [f64; 4] {
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = z.iter().map(|zi| ((zi - zmax) / mu).exp()).collect();
    let s: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|wi| wi / s).collect();
    let m1 = dot(&p, u);
    let central = |k: i32| -> f64 { p.iter().zip(u).map(|(pi, ui)| pi * (ui - m1).powi(k)).sum() };
    let (c2, c3, c4) = (central(2), central(3), central(4));
    [
        m1,
        c2 / mu,
        c3 / (mu * mu),
        (c4 - 3.0 * c2 * c2) / mu.powi(3),
    ]
}

/// Dense Gaussian elimination with partial pivoting.
pub fn gauss_solve(m: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.push(rhs[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..=n {
                a[i][j] -= f * a[col][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    x
}

/// `min_x ‖Ãx − b̃‖∞` as a linear program.
pub fn linf_optimum(a: &Matrix, b: &[f64]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let x: Vec<_> = (0..a.cols())
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for i in 0..a.rows() {
        let mut plus: Vec<_> = x.iter().zip(a.row(i)).map(|(v, c)| (*v, *c)).collect();
        plus.push((t, -1.0));
        lp.add_constraint(&plus, ComparisonOp::Le, b[i]);
        let mut minus: Vec<_> = x.iter().zip(a.row(i)).map(|(v, c)| (*v, -*c)).collect();
        minus.push((t, -1.0));
        lp.add_constraint(&minus, ComparisonOp::Le, -b[i]);
    }
    lp.solve().expect("bounded feasible LP").objective()
}

/// `min_x λ‖x‖₁ + (1/m) Σ max(0, 1 − q̃ᵢ·x)` as a linear program, `q̃ᵢ =
/// bᵢaᵢ`.
pub fn l1svm_optimum(points: &Matrix, labels: &[f64], lambda: f64) -> f64 {
    let (m, d) = (points.rows(), points.cols());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let x: Vec<_> = (0..d)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let u: Vec<_> = (0..d)
        .map(|_| lp.add_var(lambda, (0.0, f64::INFINITY)))
        .collect();
    let s: Vec<_> = (0..m)
        .map(|_| lp.add_var(1.0 / m as f64, (0.0, f64::INFINITY)))
        .collect();
    for j in 0..d {
        lp.add_constraint([(x[j], 1.0), (u[j], -1.0)], ComparisonOp::Le, 0.0);
        lp.add_constraint([(x[j], -1.0), (u[j], -1.0)], ComparisonOp::Le, 0.0);
    }
    for i in 0..m {
        // −s_i − bᵢ aᵢ·x ≤ −1
        let mut row: Vec<_> = x
            .iter()
            .zip(points.row(i))
            .map(|(v, c)| (*v, -labels[i] * c))
            .collect();
        row.push((s[i], -1.0));
        lp.add_constraint(&row, ComparisonOp::Le, -1.0);
    }
    lp.solve().expect("bounded feasible LP").objective()
}
