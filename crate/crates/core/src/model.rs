//! The regularized third-order Taylor model
//!
//! ```text
//! Ω(h) = f(x) + ⟨∇f, h⟩ + ½∇²f[h,h] + ⅙∇³f[h,h,h] + (L₃/4)‖h‖⁴_B
//! ```
//!
//! and its minimizer. With the regularization weight `L₃/4` (three times the
//! Taylor remainder constant `L₃/24`, doubled) the model is convex and lies
//! above `f` whenever the fourth derivative is bounded by `L₃` in `‖·‖_B`.

use crate::dense::{vec, NormMatrix};
use crate::error::{check_dim, invalid, Error, Result};
use crate::objectives::{Expansion, Objective};

/// Knobs for [`QuarticModel::minimize`].
#[derive(Debug, Clone, Copy)]
pub struct InnerConfig {
    /// Relative stationarity tolerance; the absolute target is
    /// `rel_tol · (1 + ‖∇f(x)‖_{B⁻¹})`.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iters: 200,
            armijo: 1e-4,
        }
    }
}

/// Result of a model minimization.
#[derive(Debug, Clone)]
pub struct ModelStep {
    pub h: Vec<f64>,
    pub iterations: usize,
    /// `‖∇Ω(h)‖_{B⁻¹}`
    pub residual: f64,
    pub model_value: f64,
}

pub struct QuarticModel<'a> {
    expansion: Box<dyn Expansion + 'a>,
    norm: &'a NormMatrix,
    l3: f64,
}

impl<'a> QuarticModel<'a> {
    pub fn new<P: Objective + ?Sized>(problem: &'a P, center: &[f64]) -> Result<Self> {
        check_dim("QuarticModel center", problem.dim(), center.len())?;
        Ok(Self::from_expansion(
            problem.expand(center),
            problem.norm(),
            problem.l3(),
        ))
    }

    pub fn from_expansion(
        expansion: Box<dyn Expansion + 'a>,
        norm: &'a NormMatrix,
        l3: f64,
    ) -> Self {
        Self {
            expansion,
            norm,
            l3,
        }
    }

    pub fn dim(&self) -> usize {
        self.expansion.center().len()
    }

    pub fn center(&self) -> &[f64] {
        self.expansion.center()
    }

    pub fn expansion(&self) -> &dyn Expansion {
        self.expansion.as_ref()
    }

    pub fn l3(&self) -> f64 {
        self.l3
    }

    /// Coefficient of `‖h‖⁴_B`: `2·3·L₃/4!`.
    pub fn regularization(&self) -> f64 {
        2.0 * 3.0 * self.l3 / 24.0
    }

    /// `Ω(h)`
    pub fn value(&self, h: &[f64]) -> Result<f64> {
        check_dim("QuarticModel::value", self.dim(), h.len())?;
        let e = &self.expansion;
        let n2 = self.norm.norm_sq(h)?;
        Ok(e.value()
            + vec::dot(e.gradient(), h)
            + 0.5 * e.hess_form(h)
            + e.third_form(h) / 6.0
            + self.regularization() * n2 * n2)
    }

    /// `∇Ω(h) = ∇f + ∇²f[h] + ½∇³f[h,h] + L₃‖h‖²_B Bh`
    pub fn gradient(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_dim("QuarticModel::gradient", self.dim(), h.len())?;
        let e = &self.expansion;
        let mut g = e.gradient().to_vec();
        vec::axpy(1.0, &e.hess_apply(h), &mut g);
        vec::axpy(0.5, &e.third_vec(h), &mut g);
        let bh = self.norm.apply(h)?;
        let n2 = vec::dot(h, &bh);
        vec::axpy(4.0 * self.regularization() * n2, &bh, &mut g);
        Ok(g)
    }

    /// Default absolute stationarity target for this center.
    pub fn tolerance(&self, rel_tol: f64) -> Result<f64> {
        Ok(rel_tol * (1.0 + self.norm.dual_norm(self.expansion.gradient())?))
    }

    /// Minimizes the model by damped Newton steps that keep the exact
    /// Hessian of the quartic term and drop `∇³f[h]`:
    ///
    /// ```text
    /// h ← h − t (∇²f + λB + 2L₃ Bh(Bh)ᵀ)⁻¹ ∇Ω(h),   λ = L₃‖h‖²_B
    /// ```
    ///
    /// solved through the shifted operator and a rank-one update, with
    /// halving backtracking on `Ω`. Stops once `‖∇Ω(h)‖_{B⁻¹} ≤ tol`. At
    /// `h = 0` the shift uses `r₀ = (‖∇f‖_{B⁻¹}/L₃)^{1/3}` in place of `‖h‖_B`.
    pub fn minimize(&self, tol: f64, config: &InnerConfig) -> Result<ModelStep> {
        if !(tol > 0.0) {
            return Err(invalid(format!(
                "inner tolerance must be positive, got {tol}"
            )));
        }
        let d = self.dim();
        let mut h = vec![0.0; d];
        let mut value = self.value(&h)?;
        let mut grad = self.gradient(&h)?;
        let mut residual = self.norm.dual_norm(&grad)?;
        let r0 = (residual / self.l3).cbrt();
        let mut iterations = 0;

        while iterations < config.max_iters && residual > tol {
            let step = self.newton_direction(&h, &grad, r0)?;
            let slope = vec::dot(&grad, &step);
            if !(slope < 0.0) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = h.iter().zip(&step).map(|(hi, si)| hi + t * si).collect();
                let tv = self.value(&trial)?;
                if tv <= value + config.armijo * t * slope {
                    accepted = Some((trial, tv, None));
                    break;
                }
                // Near the minimizer the decrease drops below the rounding
                // of Ω; accept on a smaller residual instead.
                if tv - value <= 8.0 * f64::EPSILON * value.abs().max(1.0) {
                    let tg = self.gradient(&trial)?;
                    let tr = self.norm.dual_norm(&tg)?;
                    if tr < residual {
                        accepted = Some((trial, tv, Some((tg, tr))));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((trial, tv, known)) = accepted else {
                break;
            };
            iterations += 1;
            h = trial;
            value = tv;
            (grad, residual) = match known {
                Some(k) => k,
                None => {
                    let g = self.gradient(&h)?;
                    let r = self.norm.dual_norm(&g)?;
                    (g, r)
                }
            };
        }

        if residual <= tol {
            return Ok(ModelStep {
                h,
                iterations,
                residual,
                model_value: value,
            });
        }
        Err(Error::InnerCap {
            iterations,
            residual,
            tolerance: tol,
            best: h,
        })
    }

    fn newton_direction(&self, h: &[f64], grad: &[f64], r0: f64) -> Result<Vec<f64>> {
        let n2 = self.norm.norm_sq(h)?;
        let lambda = self.l3 * if n2 > 0.0 { n2 } else { r0 * r0 };
        // solve_shifted applies a √2 factor to its shift
        let shift = lambda / std::f64::consts::SQRT_2;
        let s = match self.expansion.solve_shifted(shift, grad) {
            Ok(s) => s,
            // Degenerate curvature: fall back to a B-scaled gradient step.
            Err(Error::NotPositiveDefinite { .. }) | Err(Error::SingularShift { .. }) => {
                let s = self.norm.solve(grad)?;
                return Ok(vec::scaled(
                    -1.0 / (3.0 * lambda).max(f64::MIN_POSITIVE),
                    &s,
                ));
            }
            Err(e) => return Err(e),
        };
        if n2 == 0.0 {
            return Ok(vec::scaled(-1.0, &s));
        }
        // Sherman-Morrison for the 2L₃ Bh(Bh)ᵀ term
        let u = self.norm.apply(h)?;
        let su = self.expansion.solve_shifted(shift, &u)?;
        let c = 2.0 * self.l3;
        let coef = c * vec::dot(&u, &s) / (1.0 + c * vec::dot(&u, &su));
        let mut dir = s;
        vec::axpy(-coef, &su, &mut dir);
        Ok(vec::scaled(-1.0, &dir))
    }
}

/// `Ω_x(h)` for `problem` centered at `x`.
pub fn model_value<P: Objective + ?Sized>(problem: &P, x: &[f64], h: &[f64]) -> Result<f64> {
    QuarticModel::new(problem, x)?.value(h)
}

/// `∇Ω_x(h)` for `problem` centered at `x`.
pub fn model_grad<P: Objective + ?Sized>(problem: &P, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    QuarticModel::new(problem, x)?.gradient(h)
}

/// Minimizes the model at `x` to the default relative tolerance.
pub fn minimize_model<P: Objective + ?Sized>(
    problem: &P,
    x: &[f64],
    config: &InnerConfig,
) -> Result<ModelStep> {
    let model = QuarticModel::new(problem, x)?;
    let tol = model.tolerance(config.rel_tol)?;
    model.minimize(tol, config)
}
