//! Smoothed objectives and the oracle interface the solvers consume.
//!
//! * [`LinfProblem`]: `smax_μ(Ax − b)` with `A = [Ã; −Ã]`, `b = [b̃; −b̃]`,
//!   smooth of order three with `L₃ = 15/μ³` in the norm `‖·‖_{AᵀA}`.
//! * [`SvmProblem`] with [`Regularizer::SoftL1`]: `λ Σ soft_abs(xᵢ) +
//!   (1/m) Σ soft_hinge(1 − q̃ᵢ·x)`, `L₃ = 15(λd + ‖Q̃ᵀQ̃‖²)/μ³` in `‖·‖₂`.
//! * [`SvmProblem`] with [`Regularizer::Quartic`]: `λ‖x‖₄⁴` plus the same
//!   hinge term, `L₃ = 24λ + 15‖Q̃ᵀQ̃‖²/μ³`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{solve_shifted_softmax_hessian, vec, Cholesky, Matrix, NormMatrix};
use crate::error::{check_dim, invalid, Error, Result};
use crate::softmax::{ScalarKernel, SoftmaxState};

/// Taylor data of an objective at a fixed center.
///
/// Directions passed to these methods must have the problem dimension.
pub trait Expansion {
    fn center(&self) -> &[f64];
    fn value(&self) -> f64;
    fn gradient(&self) -> &[f64];
    /// `∇²f[h]`
    fn hess_apply(&self, h: &[f64]) -> Vec<f64>;
    /// `∇²f[h, h]`
    fn hess_form(&self, h: &[f64]) -> f64 {
        vec::dot(h, &self.hess_apply(h))
    }
    /// `∇³f[h, h]`
    fn third_vec(&self, h: &[f64]) -> Vec<f64>;
    /// `∇³f[h, h, h]`
    fn third_form(&self, h: &[f64]) -> f64 {
        vec::dot(h, &self.third_vec(h))
    }
    /// `∇⁴f[h, h, h, h]`
    fn fourth_form(&self, h: &[f64]) -> f64;
    /// Solves `(∇²f + √2 λ B) s = v`.
    fn solve_shifted(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>>;
}

/// A smooth convex objective together with the constants the solvers need.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    /// Norm in which third-order smoothness holds.
    fn norm(&self) -> &NormMatrix;
    /// Lipschitz constant of the third derivative w.r.t. [`Objective::norm`].
    fn l3(&self) -> f64;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn expand<'a>(&'a self, x: &[f64]) -> Box<dyn Expansion + 'a>;

    /// Gradient Lipschitz constant w.r.t. `‖·‖₂`, when one exists globally.
    fn l1(&self) -> Option<f64> {
        None
    }
    /// The non-smooth objective the smoothing approximates.
    fn exact_value(&self, x: &[f64]) -> f64 {
        self.value(x)
    }
    /// A deterministic subgradient of [`Objective::exact_value`].
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.gradient(x)
    }
    /// Smoothing parameter, if the objective is a smoothing.
    fn mu(&self) -> Option<f64> {
        None
    }
    /// An upper bound on `‖x₀ − x*‖` in [`Objective::norm`] for a minimizer
    /// `x*`, certified from `x₀` alone.
    fn distance_bound(&self, _x0: &[f64]) -> Option<f64> {
        None
    }
    /// The same bound in `‖·‖₂`.
    fn euclidean_distance_bound(&self, x0: &[f64]) -> Option<f64> {
        match self.norm() {
            NormMatrix::Identity(_) => self.distance_bound(x0),
            NormMatrix::Gram { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Linf,
    L1svm,
    L4svm,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Linf => "linf",
            ProblemKind::L1svm => "l1svm",
            ProblemKind::L4svm => "l4svm",
        })
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linf" => Ok(ProblemKind::Linf),
            "l1svm" => Ok(ProblemKind::L1svm),
            "l4svm" => Ok(ProblemKind::L4svm),
            other => Err(invalid(format!("unknown problem kind `{other}`"))),
        }
    }
}

/// Directional contraction orders accepted by [`oracle_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOrder {
    Value,
    Gradient,
    Hessian,
    Third,
    Fourth,
}

/// `∇ᵏf(x)[h]ᵏ` for the requested order (`f(x)` for [`OracleOrder::Value`]).
pub fn oracle_eval<P: Objective + ?Sized>(
    problem: &P,
    x: &[f64],
    h: &[f64],
    order: OracleOrder,
) -> Result<f64> {
    check_dim("oracle_eval point", problem.dim(), x.len())?;
    check_dim("oracle_eval direction", problem.dim(), h.len())?;
    let e = problem.expand(x);
    Ok(match order {
        OracleOrder::Value => e.value(),
        OracleOrder::Gradient => vec::dot(e.gradient(), h),
        OracleOrder::Hessian => e.hess_form(h),
        OracleOrder::Third => e.third_form(h),
        OracleOrder::Fourth => e.fourth_form(h),
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "target accuracy must be positive, got {eps}"
        )))
    }
}

// ---------------------------------------------------------------------------
// ℓ∞ regression

/// Smoothed `‖Ãx − b̃‖∞`.
#[derive(Debug, Clone)]
pub struct LinfProblem {
    a_tilde: Matrix,
    b_tilde: Vec<f64>,
    a: Matrix,
    b: Vec<f64>,
    mu: f64,
    norm: NormMatrix,
    ata_norm: f64,
    ata_min: f64,
}

/// Builds the ℓ∞ problem with `μ = ε / (2 log m)`, `m` the stacked row count.
pub fn build_linf(a_tilde: Matrix, b_tilde: Vec<f64>, eps: f64) -> Result<LinfProblem> {
    check_eps(eps)?;
    let m = 2.0 * a_tilde.rows() as f64;
    LinfProblem::with_mu(a_tilde, b_tilde, eps / (2.0 * m.ln()))
}

impl LinfProblem {
    pub fn with_mu(a_tilde: Matrix, b_tilde: Vec<f64>, mu: f64) -> Result<Self> {
        check_dim("LinfProblem rhs", a_tilde.rows(), b_tilde.len())?;
        crate::dense::check_finite(&b_tilde)?;
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(invalid(format!(
                "smoothing parameter must be positive, got {mu}"
            )));
        }
        let (mt, d) = (a_tilde.rows(), a_tilde.cols());
        let mut data = Vec::with_capacity(2 * mt * d);
        data.extend_from_slice(a_tilde.as_slice());
        data.extend(a_tilde.as_slice().iter().map(|v| -v));
        let a = Matrix::new(2 * mt, d, data)?;
        let b: Vec<f64> = b_tilde
            .iter()
            .copied()
            .chain(b_tilde.iter().map(|v| -v))
            .collect();
        let norm = NormMatrix::gram(a.clone())?;
        let ata_norm = a.gram().top_eigenvalue(1e-6);
        let ata_min = norm.min_eigenvalue();
        Ok(Self {
            a_tilde,
            b_tilde,
            a,
            b,
            mu,
            norm,
            ata_norm,
            ata_min,
        })
    }

    /// Same data, different smoothing parameter.
    pub fn with_smoothing(&self, mu: f64) -> Result<Self> {
        Self::with_mu(self.a_tilde.clone(), self.b_tilde.clone(), mu)
    }

    pub fn a_tilde(&self) -> &Matrix {
        &self.a_tilde
    }

    pub fn b_tilde(&self) -> &[f64] {
        &self.b_tilde
    }

    /// The stacked `[Ã; −Ã]`.
    pub fn stacked(&self) -> &Matrix {
        &self.a
    }

    /// Stacked row count `m = 2m̃`.
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// `μ log m`, the width of the smoothing sandwich.
    pub fn smoothing_gap(&self) -> f64 {
        self.mu * (self.rows() as f64).ln()
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.a.matvec(x).expect("dimension checked by caller");
        for (zi, bi) in z.iter_mut().zip(&self.b) {
            *zi -= bi;
        }
        z
    }

    pub fn state(&self, x: &[f64]) -> SoftmaxState {
        SoftmaxState::new(&self.residual(x), self.mu).expect("finite residual and positive mu")
    }
}

struct LinfExpansion<'a> {
    problem: &'a LinfProblem,
    x: Vec<f64>,
    state: SoftmaxState,
    grad: Vec<f64>,
}

impl LinfExpansion<'_> {
    fn lift(&self, h: &[f64]) -> Vec<f64> {
        self.problem
            .a
            .matvec(h)
            .expect("direction has problem dimension")
    }

    fn pull(&self, w: &[f64]) -> Vec<f64> {
        self.problem.a.matvec_t(w).expect("stacked dimension")
    }
}

impl Expansion for LinfExpansion<'_> {
    fn center(&self) -> &[f64] {
        &self.x
    }

    fn value(&self) -> f64 {
        self.state.value()
    }

    fn gradient(&self) -> &[f64] {
        &self.grad
    }

    fn hess_apply(&self, h: &[f64]) -> Vec<f64> {
        let u = self.lift(h);
        self.pull(&self.state.hess_apply(&u).expect("lifted dimension"))
    }

    fn hess_form(&self, h: &[f64]) -> f64 {
        let u = self.lift(h);
        self.state.hess_form(&u, &u).expect("lifted dimension")
    }

    fn third_vec(&self, h: &[f64]) -> Vec<f64> {
        let u = self.lift(h);
        self.pull(&self.state.third_form(&u).expect("lifted dimension").0)
    }

    fn third_form(&self, h: &[f64]) -> f64 {
        let u = self.lift(h);
        self.state.third_form(&u).expect("lifted dimension").1
    }

    fn fourth_form(&self, h: &[f64]) -> f64 {
        let u = self.lift(h);
        self.state.fourth_dir(&u).expect("lifted dimension")
    }

    fn solve_shifted(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
        solve_shifted_softmax_hessian(
            &self.problem.a,
            self.state.grad(),
            self.problem.mu,
            lambda,
            v,
        )
    }
}

impl Objective for LinfProblem {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn norm(&self) -> &NormMatrix {
        &self.norm
    }

    fn l3(&self) -> f64 {
        15.0 / self.mu.powi(3)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.state(x).value()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .matvec_t(self.state(x).grad())
            .expect("stacked dimension")
    }

    fn expand<'a>(&'a self, x: &[f64]) -> Box<dyn Expansion + 'a> {
        let state = self.state(x);
        let grad = self.a.matvec_t(state.grad()).expect("stacked dimension");
        Box::new(LinfExpansion {
            problem: self,
            x: x.to_vec(),
            state,
            grad,
        })
    }

    fn l1(&self) -> Option<f64> {
        Some(self.ata_norm / self.mu)
    }

    fn exact_value(&self, x: &[f64]) -> f64 {
        let r = self.a_tilde.matvec(x).expect("dimension");
        r.iter()
            .zip(&self.b_tilde)
            .fold(0.0, |m, (ri, bi)| m.max((ri - bi).abs()))
    }

    /// `sign(rⱼ) ãⱼ` for the lowest index `j` attaining `‖r‖∞`.
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = vec::sub(&self.a_tilde.matvec(x).expect("dimension"), &self.b_tilde);
        let mut best = 0;
        for (i, ri) in r.iter().enumerate() {
            if ri.abs() > r[best].abs() {
                best = i;
            }
        }
        match r.get(best) {
            Some(rj) if *rj != 0.0 => vec::scaled(rj.signum(), self.a_tilde.row(best)),
            _ => vec![0.0; self.dim()],
        }
    }

    fn mu(&self) -> Option<f64> {
        Some(self.mu)
    }

    /// `‖x₀ − x*‖_B = √2 ‖Ã(x₀ − x*)‖₂ ≤ √2 (‖Ãx₀ − b̃‖₂ + √m̃ f_μ(x₀))`,
    /// using `‖Ãx* − b̃‖∞ ≤ f_μ(x*) ≤ f_μ(x₀)`.
    fn distance_bound(&self, x0: &[f64]) -> Option<f64> {
        let m = self.a_tilde.rows() as f64;
        let r0 = vec::sub(&self.a_tilde.matvec(x0).ok()?, &self.b_tilde);
        Some(2f64.sqrt() * (vec::norm2(&r0) + m.sqrt() * self.value(x0)))
    }

    fn euclidean_distance_bound(&self, x0: &[f64]) -> Option<f64> {
        self.distance_bound(x0).map(|r| r / self.ata_min.sqrt())
    }
}

// ---------------------------------------------------------------------------
// soft-margin SVM

/// The coordinatewise regularizer of an SVM objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regularizer {
    /// `λ‖x‖₁`, smoothed coordinatewise with `soft_abs`.
    SoftL1 { lambda: f64 },
    /// `λ‖x‖₄⁴`, already smooth.
    Quartic { lambda: f64 },
}

impl Regularizer {
    pub fn lambda(&self) -> f64 {
        match *self {
            Regularizer::SoftL1 { lambda } | Regularizer::Quartic { lambda } => lambda,
        }
    }

    /// Value and four derivatives of the smoothed per-coordinate term.
    fn derivatives(&self, t: f64, mu: f64) -> [f64; 5] {
        match *self {
            Regularizer::SoftL1 { lambda } => {
                ScalarKernel::Abs.derivatives(t, mu).map(|v| lambda * v)
            }
            Regularizer::Quartic { lambda } => {
                let t2 = t * t;
                [
                    lambda * t2 * t2,
                    4.0 * lambda * t2 * t,
                    12.0 * lambda * t2,
                    24.0 * lambda * t,
                    24.0 * lambda,
                ]
            }
        }
    }

    fn exact(&self, t: f64) -> f64 {
        match *self {
            Regularizer::SoftL1 { lambda } => lambda * t.abs(),
            Regularizer::Quartic { lambda } => lambda * t.powi(4),
        }
    }

    /// Subgradient selector; `0` at the kink of `|·|`.
    fn subgradient(&self, t: f64) -> f64 {
        match *self {
            Regularizer::SoftL1 { lambda } => {
                if t == 0.0 {
                    0.0
                } else {
                    lambda * t.signum()
                }
            }
            Regularizer::Quartic { lambda } => 4.0 * lambda * t.powi(3),
        }
    }
}

/// `reg(x) + (1/m) Σᵢ hinge(1 − q̃ᵢ·x)` and its smoothing.
#[derive(Debug, Clone)]
pub struct SvmProblem {
    q: Matrix,
    reg: Regularizer,
    mu: f64,
    qtq_norm: f64,
    sigma4: f64,
    norm: NormMatrix,
}

/// `Q̃` with rows `bᵢ aᵢᵀ`; labels must be `±1`.
pub fn label_scaled_rows(points: &Matrix, labels: &[f64]) -> Result<Matrix> {
    check_dim("SVM labels", points.rows(), labels.len())?;
    let mut q = points.clone();
    for (i, b) in labels.iter().enumerate() {
        if *b != 1.0 && *b != -1.0 {
            return Err(invalid(format!("label {} at row {} is not ±1", b, i + 1)));
        }
        q.row_mut(i).iter_mut().for_each(|v| *v *= b);
    }
    Ok(q)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "regularization weight must be positive, got {lambda}"
        )))
    }
}

/// ℓ1-SVM with `μ = ε / (4λd)`.
pub fn build_l1svm(points: &Matrix, labels: &[f64], lambda: f64, eps: f64) -> Result<SvmProblem> {
    check_lambda(lambda)?;
    check_eps(eps)?;
    let mu = eps / (4.0 * lambda * points.cols() as f64);
    SvmProblem::new(
        label_scaled_rows(points, labels)?,
        Regularizer::SoftL1 { lambda },
        mu,
    )
}

/// ℓ4-SVM with `μ = ε / 4`.
pub fn build_l4svm(points: &Matrix, labels: &[f64], lambda: f64, eps: f64) -> Result<SvmProblem> {
    check_lambda(lambda)?;
    check_eps(eps)?;
    SvmProblem::new(
        label_scaled_rows(points, labels)?,
        Regularizer::Quartic { lambda },
        eps / 4.0,
    )
}

impl SvmProblem {
    /// `q` already carries the labels (rows `bᵢaᵢᵀ`).
    pub fn new(q: Matrix, reg: Regularizer, mu: f64) -> Result<Self> {
        check_lambda(reg.lambda())?;
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(invalid(format!(
                "smoothing parameter must be positive, got {mu}"
            )));
        }
        if q.rows() == 0 || q.cols() == 0 {
            return Err(invalid("SVM data set is empty"));
        }
        let qtq_norm = q.gram().top_eigenvalue(1e-6);
        let d = q.cols();
        Ok(Self {
            sigma4: reg.lambda() / d as f64,
            norm: NormMatrix::identity(d),
            q,
            reg,
            mu,
            qtq_norm,
        })
    }

    pub fn with_smoothing(&self, mu: f64) -> Result<Self> {
        let mut p = Self::new(self.q.clone(), self.reg, mu)?;
        p.sigma4 = self.sigma4;
        Ok(p)
    }

    pub fn kind(&self) -> ProblemKind {
        match self.reg {
            Regularizer::SoftL1 { .. } => ProblemKind::L1svm,
            Regularizer::Quartic { .. } => ProblemKind::L4svm,
        }
    }

    pub fn regularizer(&self) -> Regularizer {
        self.reg
    }

    pub fn lambda(&self) -> f64 {
        self.reg.lambda()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn samples(&self) -> usize {
        self.q.rows()
    }

    /// `‖Q̃ᵀQ̃‖`, by power iteration.
    pub fn qtq_norm(&self) -> f64 {
        self.qtq_norm
    }

    /// Uniform convexity modulus (order 4) assumed for the quartic
    /// regularizer; defaults to `λ/d`.
    pub fn sigma4(&self) -> f64 {
        self.sigma4
    }

    pub fn set_sigma4(&mut self, sigma4: f64) {
        self.sigma4 = sigma4;
    }

    /// `κ₄ = L₃ / σ₄`
    pub fn kappa4(&self) -> f64 {
        self.l3() / self.sigma4
    }

    /// A certified bound on `f_μ − f`, valid for every `x`.
    ///
    /// Each soft-abs term exceeds `|t|` by at most `μ log 2`, and the
    /// averaged soft-hinge exceeds the hinge average by at most `μ log 2`.
    pub fn smoothing_gap(&self) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        match self.reg {
            Regularizer::SoftL1 { lambda } => self.mu * ln2 * (lambda * self.q.cols() as f64 + 1.0),
            Regularizer::Quartic { .. } => self.mu * ln2,
        }
    }

    /// Hinge arguments `1 − Q̃x`.
    fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.q
            .matvec(x)
            .expect("dimension")
            .iter()
            .map(|v| 1.0 - v)
            .collect()
    }

    /// `(1/m) Σ soft_hinge(1 − q̃ᵢ·x)`
    pub fn smooth_hinge_average(&self, x: &[f64]) -> f64 {
        let m = self.samples() as f64;
        self.margins(x)
            .iter()
            .map(|c| ScalarKernel::Hinge.value(*c, self.mu))
            .sum::<f64>()
            / m
    }

    /// The smoothed regularizer alone.
    pub fn smooth_regularizer(&self, x: &[f64]) -> f64 {
        x.iter().map(|t| self.reg.derivatives(*t, self.mu)[0]).sum()
    }
}

struct SvmExpansion<'a> {
    problem: &'a SvmProblem,
    x: Vec<f64>,
    reg: Vec<[f64; 5]>,
    hinge: Vec<[f64; 5]>,
    value: f64,
    grad: Vec<f64>,
}

impl SvmExpansion<'_> {
    fn inv_m(&self) -> f64 {
        1.0 / self.problem.samples() as f64
    }

    /// `Σ_i (1/m) φ⁽ᵏ⁾(cᵢ) (−q̃ᵢ·h)^{k−1} (−q̃ᵢ)` plus the regularizer part.
    fn directional_vec(&self, h: &[f64], order: usize) -> Vec<f64> {
        let q = &self.problem.q;
        let qh = q.matvec(h).expect("dimension");
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        let w: Vec<f64> = qh
            .iter()
            .zip(&self.hinge)
            .map(|(u, k)| sign * self.inv_m() * k[order] * u.powi(order as i32 - 1))
            .collect();
        let mut out = q.matvec_t(&w).expect("dimension");
        for ((o, r), hi) in out.iter_mut().zip(&self.reg).zip(h) {
            *o += r[order] * hi.powi(order as i32 - 1);
        }
        out
    }

    fn directional_form(&self, h: &[f64], order: usize) -> f64 {
        let qh = self.problem.q.matvec(h).expect("dimension");
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        let hinge: f64 = qh
            .iter()
            .zip(&self.hinge)
            .map(|(u, k)| k[order] * u.powi(order as i32))
            .sum::<f64>()
            * self.inv_m()
            * sign;
        let reg: f64 = self
            .reg
            .iter()
            .zip(h)
            .map(|(r, hi)| r[order] * hi.powi(order as i32))
            .sum();
        reg + hinge
    }

    fn dense_hessian(&self) -> Matrix {
        let w: Vec<f64> = self.hinge.iter().map(|k| k[2] * self.inv_m()).collect();
        let mut h = self.problem.q.weighted_gram(&w).expect("dimension");
        let diag: Vec<f64> = self.reg.iter().map(|r| r[2]).collect();
        h.add_diag(&diag).expect("dimension");
        h
    }
}

impl Expansion for SvmExpansion<'_> {
    fn center(&self) -> &[f64] {
        &self.x
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn gradient(&self) -> &[f64] {
        &self.grad
    }

    fn hess_apply(&self, h: &[f64]) -> Vec<f64> {
        self.directional_vec(h, 2)
    }

    fn hess_form(&self, h: &[f64]) -> f64 {
        self.directional_form(h, 2)
    }

    fn third_vec(&self, h: &[f64]) -> Vec<f64> {
        self.directional_vec(h, 3)
    }

    fn third_form(&self, h: &[f64]) -> f64 {
        self.directional_form(h, 3)
    }

    fn fourth_form(&self, h: &[f64]) -> f64 {
        self.directional_form(h, 4)
    }

    fn solve_shifted(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("solve_shifted", self.x.len(), v.len())?;
        let mut h = self.dense_hessian();
        let shift = std::f64::consts::SQRT_2 * lambda;
        h.add_diag(&vec![shift; self.x.len()])?;
        Cholesky::factor(&h)?.solve(v)
    }
}

impl Objective for SvmProblem {
    fn dim(&self) -> usize {
        self.q.cols()
    }

    fn norm(&self) -> &NormMatrix {
        &self.norm
    }

    fn l3(&self) -> f64 {
        let hinge = 15.0 * self.qtq_norm * self.qtq_norm / self.mu.powi(3);
        match self.reg {
            Regularizer::SoftL1 { lambda } => {
                hinge + 15.0 * lambda * self.dim() as f64 / self.mu.powi(3)
            }
            Regularizer::Quartic { lambda } => hinge + 24.0 * lambda,
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.smooth_regularizer(x) + self.smooth_hinge_average(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.expand(x).gradient().to_vec()
    }

    fn expand<'a>(&'a self, x: &[f64]) -> Box<dyn Expansion + 'a> {
        let reg: Vec<[f64; 5]> = x
            .iter()
            .map(|t| self.reg.derivatives(*t, self.mu))
            .collect();
        let hinge: Vec<[f64; 5]> = self
            .margins(x)
            .iter()
            .map(|c| ScalarKernel::Hinge.derivatives(*c, self.mu))
            .collect();
        let inv_m = 1.0 / self.samples() as f64;
        let value =
            reg.iter().map(|r| r[0]).sum::<f64>() + hinge.iter().map(|k| k[0]).sum::<f64>() * inv_m;
        let w: Vec<f64> = hinge.iter().map(|k| -k[1] * inv_m).collect();
        let mut grad = self.q.matvec_t(&w).expect("dimension");
        for (g, r) in grad.iter_mut().zip(&reg) {
            *g += r[1];
        }
        Box::new(SvmExpansion {
            problem: self,
            x: x.to_vec(),
            reg,
            hinge,
            value,
            grad,
        })
    }

    fn l1(&self) -> Option<f64> {
        match self.reg {
            Regularizer::SoftL1 { lambda } => {
                Some(lambda / self.mu + self.qtq_norm / (self.samples() as f64 * self.mu))
            }
            Regularizer::Quartic { .. } => None,
        }
    }

    fn exact_value(&self, x: &[f64]) -> f64 {
        let m = self.samples() as f64;
        let reg: f64 = x.iter().map(|t| self.reg.exact(*t)).sum();
        reg + self.margins(x).iter().map(|c| c.max(0.0)).sum::<f64>() / m
    }

    /// Regularizer subgradient plus `−(1/m) Σ q̃ᵢ` over strictly active
    /// margins.
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let m = self.samples() as f64;
        let w: Vec<f64> = self
            .margins(x)
            .iter()
            .map(|c| if *c > 0.0 { -1.0 / m } else { 0.0 })
            .collect();
        let mut g = self.q.matvec_t(&w).expect("dimension");
        for (gi, t) in g.iter_mut().zip(x) {
            *gi += self.reg.subgradient(*t);
        }
        g
    }

    fn mu(&self) -> Option<f64> {
        Some(self.mu)
    }

    /// `‖x₀‖₂ + ‖x*‖₂`, with `‖x*‖` bounded through `R(x*) ≤ f_μ(x*) ≤
    /// f_μ(x₀)`: `‖x*‖₂ ≤ ‖x*‖₁ ≤ f_μ(x₀)/λ`, or `‖x*‖₂ ≤ d^{1/4}
    /// (f_μ(x₀)/λ)^{1/4}` for the quartic regularizer.
    fn distance_bound(&self, x0: &[f64]) -> Option<f64> {
        let f0 = self.value(x0);
        let star = match self.reg {
            Regularizer::SoftL1 { lambda } => f0 / lambda,
            Regularizer::Quartic { lambda } => {
                (self.dim() as f64).powf(0.25) * (f0 / lambda).powf(0.25)
            }
        };
        Some(vec::norm2(x0) + star)
    }
}

/// Samples `pairs` random pairs and checks
/// `f(y) ≥ f(x) + ⟨∇f(x), y − x⟩ + (σ/4)‖y − x‖⁴_B` with relative slack
/// `1e-10`.
///
/// Points are drawn with coordinates in `[-radius, radius]`.
pub fn certify_uniform_convexity<P: Objective + ?Sized>(
    problem: &P,
    sigma: f64,
    pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<()> {
    if !(sigma > 0.0) {
        return Err(Error::UniformConvexity {
            sigma,
            detail: "modulus must be positive".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.dim();
    for k in 0..pairs {
        // Mix scales so both the quartic and the hinge regimes are probed.
        let r = radius * [1.0, 0.1, 0.01][k % 3];
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-r..=r)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-r..=r)).collect();
        let fx = problem.value(&x);
        let fy = problem.value(&y);
        let g = problem.gradient(&x);
        let diff = vec::sub(&y, &x);
        let n2 = problem.norm().norm_sq(&diff)?;
        let lower = fx + vec::dot(&g, &diff) + sigma / 4.0 * n2 * n2;
        let slack = 1e-10 * (1.0 + fx.abs() + fy.abs());
        if fy < lower - slack {
            return Err(Error::UniformConvexity {
                sigma,
                detail: format!("pair {k}: f(y) = {fy} below lower bound {lower}"),
            });
        }
    }
    Ok(())
}
