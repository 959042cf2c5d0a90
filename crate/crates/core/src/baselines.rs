//! First-order reference methods sharing the accelerated solver's stopping
//! rule and trace format.

use std::time::Instant;

use crate::accel::EstimateSequence;
use crate::dense::{vec, NormMatrix};
use crate::error::{check_dim, invalid, Result};
use crate::objectives::Objective;
use crate::report::{Method, NullSink, SolverReport, Status, TracePoint, TraceSink};

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub eps: f64,
    pub max_iters: usize,
    pub x0: Option<Vec<f64>>,
    /// AGD: restart the momentum when `⟨∇f(y_k), x_{k+1} − x_k⟩ > 0`.
    pub restart: bool,
    /// Subgradient step scale `η₀` in `η₀/√(k+1)`; `None` picks
    /// `max(1, ‖x₀‖)`.
    pub eta0: Option<f64>,
    /// Subgradient: stop once the best exact value is at most this.
    pub target: Option<f64>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            max_iters: 10_000,
            x0: None,
            restart: false,
            eta0: None,
            target: None,
        }
    }
}

impl BaselineConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }

    fn start(&self, dim: usize) -> Result<Vec<f64>> {
        if !(self.eps > 0.0) {
            return Err(invalid(format!("eps must be positive, got {}", self.eps)));
        }
        match &self.x0 {
            Some(x0) => {
                check_dim("BaselineConfig::x0", dim, x0.len())?;
                Ok(x0.clone())
            }
            None => Ok(vec![0.0; dim]),
        }
    }
}

/// Accelerated gradient descent in similar-triangles form with step `1/L₁`.
///
/// The iterate is kept monotone: a step that would raise `f_μ` keeps the
/// previous point, which leaves the estimate-sequence bound intact.
pub fn agd_run<P: Objective + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
) -> Result<SolverReport> {
    agd_run_with_sink(problem, config, &mut NullSink)
}

pub fn agd_run_with_sink<P: Objective + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
    sink: &mut dyn TraceSink,
) -> Result<SolverReport> {
    let d = problem.dim();
    let l1 = problem
        .l1()
        .ok_or_else(|| invalid("AGD needs a global gradient Lipschitz constant"))?;
    let mut x = config.start(d)?;
    let start = Instant::now();
    let euclid = NormMatrix::identity(d);

    let mut fx = problem.value(&x);
    let mut radius = problem.euclidean_distance_bound(&x).unwrap_or(0.0);
    let mut psi = EstimateSequence::new(x.clone());
    let mut v = x.clone();
    let mut trace = Vec::new();
    let mut gap = f64::INFINITY;
    let mut status = Status::CapReached;
    let mut epoch = 0;

    if vec::norm2(&problem.gradient(&x)) <= f64::EPSILON * (1.0 + fx.abs()) {
        status = Status::Converged;
        gap = 0.0;
    } else {
        for k in 0..config.max_iters {
            let big_a = psi.big_a();
            let a = (1.0 + (1.0 + 4.0 * l1 * big_a).sqrt()) / (2.0 * l1);
            let tau = a / (big_a + a);
            let y = vec::lerp(&x, &v, tau);
            let f_y = problem.value(&y);
            let g_y = problem.gradient(&y);
            psi.add(a, f_y, &g_y, &y);
            v = psi.minimizer(&euclid)?;
            let z = vec::lerp(&x, &v, tau);
            let f_z = problem.value(&z);
            let moved = vec::sub(&z, &x);
            let (x_next, f_next) = if f_z <= fx { (z, f_z) } else { (x.clone(), fx) };

            let prev_big_a = big_a;
            if config.restart && vec::dot(&g_y, &moved) > 0.0 {
                epoch += 1;
                psi = EstimateSequence::new(x_next.clone());
                v = x_next.clone();
                radius = problem.euclidean_distance_bound(&x_next).unwrap_or(0.0);
                gap = f64::INFINITY;
            } else {
                gap = psi.gap_bound(f_next, radius, &euclid)?;
            }
            x = x_next;
            fx = f_next;

            let point = TracePoint {
                iter: k + 1,
                wall_s: start.elapsed().as_secs_f64(),
                f: problem.exact_value(&x),
                f_mu: fx,
                gap_est: gap,
                rho: 0.0,
                a,
                big_a: prev_big_a + a,
                inner_iters: 0,
                prev_big_a,
                displacement_sq: 0.0,
                f_mu_y: f_y,
                probes: 0,
                bracket: (0.0, 0.0),
                epoch,
            };
            sink.record(&point)?;
            trace.push(point);
            if gap <= config.eps / 2.0 {
                status = Status::Converged;
                break;
            }
        }
    }

    Ok(SolverReport {
        method: Method::Agd,
        f: problem.exact_value(&x),
        f_mu: fx,
        best_f_mu: fx,
        best_x: x.clone(),
        x,
        gap_est: gap,
        iterations: trace.len(),
        status,
        trace,
        epochs: epoch + 1,
        message: None,
    })
}

/// Subgradient method on the exact objective with normalized steps
/// `η₀/√(k+1) · g/‖g‖`; reports the best point found.
pub fn subgradient_run<P: Objective + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
) -> Result<SolverReport> {
    subgradient_run_with_sink(problem, config, &mut NullSink)
}

pub fn subgradient_run_with_sink<P: Objective + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
    sink: &mut dyn TraceSink,
) -> Result<SolverReport> {
    let d = problem.dim();
    let mut x = config.start(d)?;
    let eta0 = config.eta0.unwrap_or_else(|| vec::norm2(&x).max(1.0));
    if !(eta0 > 0.0) {
        return Err(invalid(format!("eta0 must be positive, got {eta0}")));
    }
    let start = Instant::now();
    let mut best_f = problem.exact_value(&x);
    let mut best_x = x.clone();
    let mut trace = Vec::new();
    let mut status = Status::CapReached;
    let reached = |f: f64| config.target.is_some_and(|t| f <= t);

    if reached(best_f) {
        status = Status::Converged;
    } else {
        for k in 0..config.max_iters {
            let g = problem.subgradient(&x);
            let gn = vec::norm2(&g);
            if gn == 0.0 {
                status = Status::Converged;
                break;
            }
            let step = eta0 / ((k + 1) as f64).sqrt();
            vec::axpy(-step / gn, &g, &mut x);
            let f = problem.exact_value(&x);
            if f < best_f {
                best_f = f;
                best_x.copy_from_slice(&x);
            }
            let point = TracePoint {
                iter: k + 1,
                wall_s: start.elapsed().as_secs_f64(),
                f: best_f,
                f_mu: f64::NAN,
                gap_est: f64::NAN,
                rho: 0.0,
                a: step,
                big_a: 0.0,
                inner_iters: 0,
                prev_big_a: 0.0,
                displacement_sq: step * step,
                f_mu_y: f64::NAN,
                probes: 0,
                bracket: (0.0, 0.0),
                epoch: 0,
            };
            sink.record(&point)?;
            trace.push(point);
            if reached(best_f) {
                status = Status::Converged;
                break;
            }
        }
    }

    Ok(SolverReport {
        method: Method::Subgradient,
        f: best_f,
        f_mu: problem.value(&best_x),
        best_f_mu: problem.value(&best_x),
        x: best_x.clone(),
        best_x,
        gap_est: f64::NAN,
        iterations: trace.len(),
        status,
        trace,
        epochs: 1,
        message: None,
    })
}
