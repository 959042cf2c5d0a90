mod common;

use common::{l1svm_optimum, linf_optimum};
use smoothaccel::accel::{self, RunConfig};
use smoothaccel::baselines::{agd_run, subgradient_run, BaselineConfig};
use smoothaccel::dense::NormMatrix;
use smoothaccel::instances::{self, Instance};
use smoothaccel::objectives::{build_l1svm, build_linf, Expansion, Objective};
use smoothaccel::report::Status;

fn linf(m: usize, d: usize, seed: u64) -> (smoothaccel::dense::Matrix, Vec<f64>) {
    match instances::generate(instances::InstanceKind::LinfRandom, m, d, seed).unwrap() {
        Instance::Linf { a, b, .. } => (a, b),
        _ => unreachable!(),
    }
}

#[test]
fn accel_matches_lp_optimum_on_small_linf() {
    let (a, b) = linf(40, 10, 24);
    let f_star = linf_optimum(&a, &b);
    let p = build_linf(a, b, 1e-2).unwrap();
    let rep = accel::run(&p, &RunConfig::with_eps(1e-2)).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert!(rep.f >= f_star - 1e-9);
    assert!(rep.f - f_star <= 1e-2, "{} vs {f_star}", rep.f);
}

#[test]
fn accel_and_agd_agree_on_interpolation_optimum() {
    let Instance::Linf { a, b, .. } = instances::linf_interp(20, 5).unwrap() else {
        unreachable!()
    };
    let p = build_linf(a, b, 1e-4).unwrap();
    let acc = accel::run(&p, &RunConfig::with_eps(1e-4)).unwrap();
    let agd = agd_run(
        &p,
        &BaselineConfig {
            max_iters: 1_000_000,
            ..BaselineConfig::with_eps(1e-4)
        },
    )
    .unwrap();
    assert!(acc.f <= 1e-4, "{}", acc.f);
    assert!(agd.f <= 1e-4, "{}", agd.f);

    // the subgradient method only gets the best-so-far guarantee; it
    // keeps decreasing toward 0
    let sg = subgradient_run(
        &p,
        &BaselineConfig {
            max_iters: 20_000,
            ..BaselineConfig::default()
        },
    )
    .unwrap();
    let start = p.exact_value(&[0.0; 20]);
    assert!(sg.f < 0.1 * start, "{} vs {start}", sg.f);
}

#[test]
fn accel_l1svm_within_eps_of_lp() {
    let Instance::Svm { data, .. } = instances::svm_noisy(60, 8, 2, 0.1).unwrap() else {
        unreachable!()
    };
    let f_star = l1svm_optimum(&data.points, &data.labels, 0.05);
    let p = build_l1svm(&data.points, &data.labels, 0.05, 0.05).unwrap();
    let rep = accel::run(&p, &RunConfig::with_eps(0.05)).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert!((rep.f - f_star).abs() <= 0.05, "{} vs {f_star}", rep.f);
}

/// `½ xᵀ diag(c) x`, used only by first-order methods.
struct Quadratic {
    c: Vec<f64>,
    norm: NormMatrix,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }
    fn norm(&self) -> &NormMatrix {
        &self.norm
    }
    fn l3(&self) -> f64 {
        1.0
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&self.c).map(|(x, c)| c * x * x).sum::<f64>()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.c).map(|(x, c)| c * x).collect()
    }
    fn expand<'a>(&'a self, _x: &[f64]) -> Box<dyn Expansion + 'a> {
        unimplemented!("first-order use only")
    }
    fn l1(&self) -> Option<f64> {
        Some(self.c.iter().cloned().fold(0.0, f64::max))
    }
    fn distance_bound(&self, x0: &[f64]) -> Option<f64> {
        Some(x0.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

#[test]
fn agd_on_well_conditioned_quadratic() {
    let p = Quadratic {
        c: vec![1.0, 2.0, 4.0],
        norm: NormMatrix::identity(3),
    };
    let rep = agd_run(
        &p,
        &BaselineConfig {
            x0: Some(vec![1.0, -1.0, 0.5]),
            max_iters: 200,
            ..BaselineConfig::with_eps(1e-6)
        },
    )
    .unwrap();
    assert!(rep.f <= 1e-6, "{}", rep.f);
}

/// `|x|` on the line.
struct Abs(NormMatrix);

impl Objective for Abs {
    fn dim(&self) -> usize {
        1
    }
    fn norm(&self) -> &NormMatrix {
        &self.0
    }
    fn l3(&self) -> f64 {
        1.0
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[0].abs()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0].signum()]
    }
    fn expand<'a>(&'a self, _x: &[f64]) -> Box<dyn Expansion + 'a> {
        unimplemented!("first-order use only")
    }
}

#[test]
fn subgradient_on_absolute_value() {
    let rep = subgradient_run(
        &Abs(NormMatrix::identity(1)),
        &BaselineConfig {
            x0: Some(vec![3.0]),
            max_iters: 10_000,
            ..BaselineConfig::default()
        },
    )
    .unwrap();
    // steps are 3/√k, so the best iterate lands within one step of 0
    assert!(rep.f <= 3.0 / 10_000f64.sqrt(), "{}", rep.f);
    assert_eq!(rep.status, Status::CapReached);
}
