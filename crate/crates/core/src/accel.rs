//! Accelerated third-order method.
//!
//! Each outer iteration keeps an estimate sequence
//! `ψ_k(x) = ½‖x − x₀‖²_B + Σᵢ aᵢ [f(xᵢ) + ⟨∇f(xᵢ), x − xᵢ⟩]` with minimizer
//! `v_k`, then searches for a step weight `ρ` such that the model step from
//! `y_k = (1 − τ)x_k + τ v_k` has `‖x_{k+1} − y_k‖²_B` within a factor `θ` of
//! `ρ`, where `a_{k+1}` solves `a² = (A_k + a)/(L₃ρ)` and `τ = a/(A_k + a)`.
//!
//! Runs stop when [`EstimateSequence::gap_bound`] is at most `ε/2`.

use std::time::Instant;

use crate::dense::{vec, NormMatrix};
use crate::error::{invalid, Error, Result};
use crate::model::{InnerConfig, QuarticModel};
use crate::objectives::{certify_uniform_convexity, Objective, SvmProblem};
use crate::report::{Method, NullSink, SolverReport, Status, TracePoint, TraceSink};

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Target accuracy on the non-smooth problem; the smoothed problem is
    /// solved to `ε/2`.
    pub eps: f64,
    pub max_iters: usize,
    /// ρ-search window factor, `> 1`.
    pub theta: f64,
    pub inner: InnerConfig,
    pub max_bisections: usize,
    /// Starting point; the origin when `None`.
    pub x0: Option<Vec<f64>>,
    /// Per-epoch budget constant `c` in `⌈c·κ₄^{1/5}⌉`.
    pub restart_constant: f64,
    pub max_epochs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            max_iters: 100_000,
            theta: 2.0,
            inner: InnerConfig::default(),
            max_bisections: 60,
            x0: None,
            restart_constant: 8.0,
            max_epochs: 50,
        }
    }
}

impl RunConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.theta > 1.0) {
            return Err(invalid(format!("theta must exceed 1, got {}", self.theta)));
        }
        if let Some(x0) = &self.x0 {
            crate::error::check_dim("RunConfig::x0", dim, x0.len())?;
        }
        Ok(())
    }
}

/// The running `ψ_k`: anchor, accumulated gradient and constant, and `A_k`.
#[derive(Debug, Clone)]
pub struct EstimateSequence {
    x0: Vec<f64>,
    g_acc: Vec<f64>,
    c_acc: f64,
    big_a: f64,
}

impl EstimateSequence {
    pub fn new(x0: Vec<f64>) -> Self {
        let d = x0.len();
        Self {
            x0,
            g_acc: vec![0.0; d],
            c_acc: 0.0,
            big_a: 0.0,
        }
    }

    pub fn big_a(&self) -> f64 {
        self.big_a
    }

    pub fn anchor(&self) -> &[f64] {
        &self.x0
    }

    /// `ψ ← ψ + a [f(x) + ⟨g, · − x⟩]`
    pub fn add(&mut self, a: f64, fx: f64, g: &[f64], x: &[f64]) {
        vec::axpy(a, g, &mut self.g_acc);
        self.c_acc += a * (fx - vec::dot(g, x));
        self.big_a += a;
    }

    /// `v_k = x₀ − B⁻¹ g_acc`
    pub fn minimizer(&self, norm: &NormMatrix) -> Result<Vec<f64>> {
        Ok(vec::sub(&self.x0, &norm.solve(&self.g_acc)?))
    }

    /// `ℓ_k(x)`, the `A_k`-averaged linear lower model; `-∞` before any
    /// step.
    pub fn lower_envelope(&self, x: &[f64]) -> f64 {
        if self.big_a > 0.0 {
            (self.c_acc + vec::dot(&self.g_acc, x)) / self.big_a
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `f(x_k) − min { ℓ_k(x) : ‖x − x₀‖_B ≤ R }` with
    /// `R = max(radius, ‖g_acc‖_{B⁻¹})`, that is
    /// `f(x_k) − ℓ_k(x₀) + R‖g_acc‖_{B⁻¹}/A_k`.
    ///
    /// This bounds `f(x_k) − f*` whenever `radius ≥ ‖x₀ − x*‖_B`. With
    /// `radius = 0` it reduces to `f(x_k) − ℓ_k(v_k)`.
    pub fn gap_bound(&self, fx: f64, radius: f64, norm: &NormMatrix) -> Result<f64> {
        if self.big_a <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let gn = norm.dual_norm(&self.g_acc)?;
        Ok(fx - self.lower_envelope(&self.x0) + radius.max(gn) * gn / self.big_a)
    }

    /// `ψ_k(x)`
    pub fn value(&self, x: &[f64], norm: &NormMatrix) -> Result<f64> {
        let d = vec::sub(x, &self.x0);
        Ok(0.5 * norm.norm_sq(&d)? + self.c_acc + vec::dot(&self.g_acc, x))
    }
}

/// Positive root of `L₃ρ a² − a − A_k = 0`.
pub fn step_a(big_a: f64, l3: f64, rho: f64) -> Result<f64> {
    if !(l3 > 0.0) || !(rho > 0.0) || !(big_a >= 0.0) {
        return Err(invalid(format!(
            "step_a needs L3 > 0, rho > 0, A >= 0 (got {l3}, {rho}, {big_a})"
        )));
    }
    let lr = l3 * rho;
    Ok((1.0 + (1.0 + 4.0 * lr * big_a).sqrt()) / (2.0 * lr))
}

/// One trial of the ρ search.
#[derive(Debug, Clone)]
pub struct Probe {
    pub rho: f64,
    pub a: f64,
    pub y: Vec<f64>,
    pub x_next: Vec<f64>,
    pub displacement_sq: f64,
    pub f_y: f64,
    pub inner_iters: usize,
}

/// Accepted outcome of [`rho_search`].
#[derive(Debug, Clone)]
pub struct RhoSearch {
    pub probe: Probe,
    pub probes: usize,
    pub bracket: (f64, f64),
    pub inner_iters: usize,
}

fn probe<P: Objective + ?Sized>(
    problem: &P,
    x: &[f64],
    v: &[f64],
    big_a: f64,
    rho: f64,
    inner: &InnerConfig,
) -> Result<Probe> {
    let a = step_a(big_a, problem.l3(), rho)?;
    let tau = a / (big_a + a);
    let y = vec::lerp(x, v, tau);
    let model = QuarticModel::new(problem, &y)?;
    let tol = model.tolerance(inner.rel_tol)?;
    let step = model.minimize(tol, inner)?;
    let displacement_sq = problem.norm().norm_sq(&step.h)?;
    Ok(Probe {
        rho,
        a,
        f_y: model.expansion().value(),
        x_next: vec::add(&y, &step.h),
        y,
        displacement_sq,
        inner_iters: step.iterations,
    })
}

const RHO_MIN: f64 = 1e-60;
const RHO_MAX: f64 = 1e60;

/// Finds `ρ` with `ρ/θ ≤ ‖x_{k+1} − y_k‖²_B ≤ θρ` by bracketing and
/// bisection on `log ρ`, starting from `rho_guess`.
#[allow(clippy::too_many_arguments)]
pub fn rho_search<P: Objective + ?Sized>(
    problem: &P,
    x: &[f64],
    v: &[f64],
    big_a: f64,
    rho_guess: f64,
    theta: f64,
    max_bisections: usize,
    inner: &InnerConfig,
) -> Result<RhoSearch> {
    let mut inner_iters = 0;
    let mut probes = 0;
    let mut eval = |rho: f64| -> Result<(Probe, f64)> {
        let p = probe(problem, x, v, big_a, rho, inner)?;
        inner_iters += p.inner_iters;
        probes += 1;
        let ratio = p.displacement_sq / rho;
        Ok((p, ratio))
    };

    if big_a == 0.0 {
        // τ = 1 for every ρ, so y = v and the displacement does not depend
        // on ρ: take it as ρ directly.
        let (first, _) = eval(rho_guess.clamp(1e-12, 1e12))?;
        let rho = first.displacement_sq;
        if !(rho > 0.0) {
            return Err(Error::RhoSearch {
                probes,
                lo: rho,
                hi: rho,
            });
        }
        let (p, _) = eval(rho)?;
        return Ok(RhoSearch {
            probe: p,
            probes,
            bracket: (rho, rho),
            inner_iters,
        });
    }

    let in_window = |ratio: f64| ratio >= 1.0 / theta && ratio <= theta;
    let mut rho = rho_guess.clamp(RHO_MIN, RHO_MAX);
    let (p, ratio) = eval(rho)?;
    if in_window(ratio) {
        return Ok(RhoSearch {
            probe: p,
            probes,
            bracket: (rho, rho),
            inner_iters,
        });
    }

    // ratio > 1: ρ too small. Expand geometrically until the ratio crosses 1.
    let (mut lo, mut hi);
    let grow = ratio > 1.0;
    let mut factor: f64 = 4.0;
    loop {
        let prev = rho;
        rho = if grow { rho * factor } else { rho / factor };
        factor = (factor * factor).min(1e8);
        if !(RHO_MIN..=RHO_MAX).contains(&rho) {
            return Err(Error::RhoSearch {
                probes,
                lo: prev.min(rho),
                hi: prev.max(rho),
            });
        }
        let (p, ratio) = eval(rho)?;
        if in_window(ratio) {
            return Ok(RhoSearch {
                probe: p,
                probes,
                bracket: (prev.min(rho), prev.max(rho)),
                inner_iters,
            });
        }
        if (ratio > 1.0) != grow {
            (lo, hi) = if grow { (prev, rho) } else { (rho, prev) };
            break;
        }
    }

    for _ in 0..max_bisections {
        let mid = (lo * hi).sqrt();
        let (p, ratio) = eval(mid)?;
        if in_window(ratio) {
            return Ok(RhoSearch {
                probe: p,
                probes,
                bracket: (lo, hi),
                inner_iters,
            });
        }
        if ratio > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::RhoSearch { probes, lo, hi })
}

/// Runs the accelerated method.
pub fn run<P: Objective + ?Sized>(problem: &P, config: &RunConfig) -> Result<SolverReport> {
    run_with_sink(problem, config, &mut NullSink)
}

/// Absolute threshold below which a gradient counts as zero.
fn stationary(grad_dual: f64, f: f64) -> bool {
    grad_dual <= f64::EPSILON * (1.0 + f.abs())
}

pub fn run_with_sink<P: Objective + ?Sized>(
    problem: &P,
    config: &RunConfig,
    sink: &mut dyn TraceSink,
) -> Result<SolverReport> {
    run_epoch(problem, config, sink, 0, 0)
}

fn run_epoch<P: Objective + ?Sized>(
    problem: &P,
    config: &RunConfig,
    sink: &mut dyn TraceSink,
    epoch: usize,
    iter_offset: usize,
) -> Result<SolverReport> {
    let d = problem.dim();
    config.validate(d)?;
    let start = Instant::now();
    let norm = problem.norm();
    let x0 = config.x0.clone().unwrap_or_else(|| vec![0.0; d]);

    let radius = problem.distance_bound(&x0).unwrap_or(0.0);
    let mut x = x0.clone();
    let mut fx = problem.value(&x);
    let mut psi = EstimateSequence::new(x0);
    let mut trace = Vec::new();
    let mut gap = f64::INFINITY;
    let mut best = (fx, x.clone());

    let finish = |x: Vec<f64>,
                  fx: f64,
                  gap: f64,
                  trace: Vec<TracePoint>,
                  best: (f64, Vec<f64>),
                  status,
                  message| SolverReport {
        method: Method::Accel,
        f: problem.exact_value(&x),
        f_mu: fx,
        x,
        gap_est: gap,
        iterations: trace.len(),
        status,
        trace,
        epochs: 1,
        best_f_mu: best.0,
        best_x: best.1,
        message,
    };

    let g0 = problem.gradient(&x);
    if stationary(norm.dual_norm(&g0)?, fx) {
        return Ok(finish(x, fx, 0.0, trace, best, Status::Converged, None));
    }

    let mut rho_prev = {
        let g = norm.dual_norm(&g0)?;
        (g * g / problem.l3().powf(2.0 / 3.0)).clamp(1e-12, 1e12)
    };

    for k in 0..config.max_iters {
        let v = psi.minimizer(norm)?;
        let search = match rho_search(
            problem,
            &x,
            &v,
            psi.big_a(),
            rho_prev,
            config.theta,
            config.max_bisections,
            &config.inner,
        ) {
            Ok(s) => s,
            Err(e @ (Error::InnerCap { .. } | Error::RhoSearch { .. })) => {
                return Ok(finish(
                    x,
                    fx,
                    gap,
                    trace,
                    best,
                    Status::InnerFailure,
                    Some(e.to_string()),
                ));
            }
            Err(e) => return Err(e),
        };
        let p = &search.probe;
        let prev_big_a = psi.big_a();
        let expansion = problem.expand(&p.x_next);
        let f_next = expansion.value();
        psi.add(p.a, f_next, expansion.gradient(), &p.x_next);
        drop(expansion);

        x = p.x_next.clone();
        fx = f_next;
        if fx < best.0 {
            best = (fx, x.clone());
        }
        rho_prev = p.rho;
        gap = psi.gap_bound(fx, radius, norm)?;

        let point = TracePoint {
            iter: iter_offset + k + 1,
            wall_s: start.elapsed().as_secs_f64(),
            f: problem.exact_value(&x),
            f_mu: fx,
            gap_est: gap,
            rho: p.rho,
            a: p.a,
            big_a: psi.big_a(),
            inner_iters: search.inner_iters,
            prev_big_a,
            displacement_sq: p.displacement_sq,
            f_mu_y: p.f_y,
            probes: search.probes,
            bracket: search.bracket,
            epoch,
        };
        sink.record(&point)?;
        trace.push(point);

        if gap <= config.eps / 2.0 {
            return Ok(finish(x, fx, gap, trace, best, Status::Converged, None));
        }
    }
    Ok(finish(x, fx, gap, trace, best, Status::CapReached, None))
}

/// `⌈c · κ₄^{1/5}⌉`
pub fn epoch_budget(kappa4: f64, constant: f64) -> usize {
    (constant * kappa4.powf(0.2)).ceil().max(1.0) as usize
}

/// Restarted runs for a uniformly convex objective with modulus `sigma4`.
///
/// Each epoch runs at most [`epoch_budget`] iterations from the best point
/// seen so far with a fresh estimate sequence; the run stops as soon as an
/// epoch meets the gap target.
pub fn run_restarted_with<P: Objective + ?Sized>(
    problem: &P,
    sigma4: f64,
    config: &RunConfig,
    sink: &mut dyn TraceSink,
) -> Result<SolverReport> {
    if !(sigma4 > 0.0) {
        return Err(invalid(format!(
            "uniform convexity modulus must be positive, got {sigma4}"
        )));
    }
    config.validate(problem.dim())?;
    let budget = epoch_budget(problem.l3() / sigma4, config.restart_constant);
    let mut start = config
        .x0
        .clone()
        .unwrap_or_else(|| vec![0.0; problem.dim()]);
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut last = None;

    for epoch in 0..config.max_epochs {
        let remaining = config.max_iters.saturating_sub(trace.len());
        if remaining == 0 && epoch > 0 {
            break;
        }
        let epoch_config = RunConfig {
            x0: Some(start.clone()),
            max_iters: budget.min(remaining),
            ..config.clone()
        };
        let report = run_epoch(problem, &epoch_config, sink, epoch, trace.len())?;
        trace.extend(report.trace.iter().cloned());
        let status = report.status;
        let next_start = report.best_x.clone();
        last = Some((report, epoch + 1));
        match status {
            Status::Converged | Status::InnerFailure => break,
            Status::CapReached => start = next_start,
        }
    }

    let (mut report, epochs) = last.expect("at least one epoch runs");
    report.epochs = epochs;
    report.iterations = trace.len();
    report.trace = trace;
    Ok(report)
}

/// Restarted runs on an ℓ4-SVM, after certifying the problem's uniform
/// convexity modulus by sampling.
pub fn run_restarted(problem: &SvmProblem, config: &RunConfig) -> Result<SolverReport> {
    run_restarted_sink(problem, config, &mut NullSink)
}

pub fn run_restarted_sink(
    problem: &SvmProblem,
    config: &RunConfig,
    sink: &mut dyn TraceSink,
) -> Result<SolverReport> {
    certify_uniform_convexity(problem, problem.sigma4(), 1000, 2.0, 0x5eed)?;
    run_restarted_with(problem, problem.sigma4(), config, sink)
}
