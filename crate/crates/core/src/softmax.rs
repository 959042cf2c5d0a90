//! Numerically stable softmax calculus.
//!
//! `smax_μ(z) = μ log Σᵢ exp(zᵢ/μ)` and its directional derivatives up to
//! order four, plus the scalar soft-abs and soft-hinge kernels built from
//! two-point softmaxes. Every exponential is taken after shifting by
//! `max zᵢ`, so arguments with `‖z‖∞/μ` in the millions are fine.
//!
//! Derivatives are only ever returned as contractions along a direction; no
//! dense tensor is formed.

use crate::dense::vec;
use crate::error::{check_dim, invalid, Result};

/// Cached softmax quantities at one point `z`.
#[derive(Debug, Clone)]
pub struct SoftmaxState {
    z: Vec<f64>,
    mu: f64,
    shift: f64,
    p: Vec<f64>,
    log_z_shifted: f64,
}

impl SoftmaxState {
    pub fn new(z: &[f64], mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(invalid(format!(
                "smoothing parameter must be positive, got {mu}"
            )));
        }
        if z.is_empty() {
            return Err(invalid("softmax of an empty vector"));
        }
        crate::dense::check_finite(z)?;
        let shift = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = z.iter().map(|zi| ((zi - shift) / mu).exp()).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|pi| *pi /= total);
        Ok(Self {
            z: z.to_vec(),
            mu,
            shift,
            p,
            log_z_shifted: total.ln(),
        })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn point(&self) -> &[f64] {
        &self.z
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn log_partition_shifted(&self) -> f64 {
        self.log_z_shifted
    }

    /// `smax_μ(z)`
    pub fn value(&self) -> f64 {
        self.shift + self.mu * self.log_z_shifted
    }

    /// The gradient, a point of the simplex.
    pub fn grad(&self) -> &[f64] {
        &self.p
    }

    fn mean(&self, h: &[f64]) -> f64 {
        vec::dot(&self.p, h)
    }

    /// `∇²smax[h]`
    pub fn hess_apply(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_dim("SoftmaxState::hess_apply", self.dim(), h.len())?;
        Ok(self.hess_apply_unchecked(h))
    }

    fn hess_apply_unchecked(&self, h: &[f64]) -> Vec<f64> {
        let m = self.mean(h);
        self.p
            .iter()
            .zip(h)
            .map(|(pi, hi)| pi * (hi - m) / self.mu)
            .collect()
    }

    /// `∇²smax[h₁, h₂]`
    pub fn hess_form(&self, h1: &[f64], h2: &[f64]) -> Result<f64> {
        check_dim("SoftmaxState::hess_form", self.dim(), h1.len())?;
        check_dim("SoftmaxState::hess_form", self.dim(), h2.len())?;
        Ok(self.hess_form_unchecked(h1, h2))
    }

    fn hess_form_unchecked(&self, h1: &[f64], h2: &[f64]) -> f64 {
        // ⟨p, h₁∘h₂⟩ − ⟨p,h₁⟩⟨p,h₂⟩ written as a centered sum to avoid
        // cancellation when the means dominate.
        let m1 = self.mean(h1);
        let m2 = self.mean(h2);
        self.p
            .iter()
            .zip(h1.iter().zip(h2))
            .map(|(pi, (a, b))| pi * (a - m1) * (b - m2))
            .sum::<f64>()
            / self.mu
    }

    /// `∇³smax[h₁, h₂]` as a vector.
    pub fn third_mixed(&self, h1: &[f64], h2: &[f64]) -> Result<Vec<f64>> {
        check_dim("SoftmaxState::third_mixed", self.dim(), h1.len())?;
        check_dim("SoftmaxState::third_mixed", self.dim(), h2.len())?;
        let mut out = self.hess_apply_unchecked(&vec::hadamard(h1, h2));
        vec::axpy(-self.mean(h1), &self.hess_apply_unchecked(h2), &mut out);
        vec::axpy(-self.mean(h2), &self.hess_apply_unchecked(h1), &mut out);
        out.iter_mut().for_each(|v| *v /= self.mu);
        Ok(out)
    }

    /// `(∇³smax[h, h], ∇³smax[h, h, h])`
    pub fn third_form(&self, h: &[f64]) -> Result<(Vec<f64>, f64)> {
        check_dim("SoftmaxState::third_form", self.dim(), h.len())?;
        let m = self.mean(h);
        let mut v3 = self.hess_apply_unchecked(&vec::hadamard(h, h));
        vec::axpy(-2.0 * m, &self.hess_apply_unchecked(h), &mut v3);
        v3.iter_mut().for_each(|v| *v /= self.mu);
        // Scalar computed from central moments, which is the same quantity
        // without the cancellation in ⟨v3, h⟩.
        let s3 = self
            .p
            .iter()
            .zip(h)
            .map(|(pi, hi)| pi * (hi - m).powi(3))
            .sum::<f64>()
            / (self.mu * self.mu);
        Ok((v3, s3))
    }

    /// `∇³smax[h², h, h]`, the intermediate quantity bounded by `5‖h‖⁴/μ²`.
    pub fn third_sq_form(&self, h: &[f64]) -> Result<f64> {
        let h2 = vec::hadamard(h, h);
        let v = self.third_mixed(&h2, h)?;
        Ok(vec::dot(&v, h))
    }

    /// `∇⁴smax[h, h, h, h]`, assembled as
    /// `(1/μ)(∇³[h², h, h] − 2⟨p,h⟩∇³[h,h,h] − 2(∇²[h,h])²)`.
    pub fn fourth_dir(&self, h: &[f64]) -> Result<f64> {
        check_dim("SoftmaxState::fourth_dir", self.dim(), h.len())?;
        // The three pieces individually carry large means; center h first.
        // Every derivative form is invariant under h ↦ h + c·1.
        let m = self.mean(h);
        let hc: Vec<f64> = h.iter().map(|v| v - m).collect();
        let t_sq = self.third_sq_form(&hc)?;
        let (_, t3) = self.third_form(&hc)?;
        let q = self.hess_form_unchecked(&hc, &hc);
        Ok((t_sq - 2.0 * self.mean(&hc) * t3 - 2.0 * q * q) / self.mu)
    }
}

/// `smax_μ(z)`
pub fn smax_value(z: &[f64], mu: f64) -> Result<f64> {
    Ok(SoftmaxState::new(z, mu)?.value())
}

/// The two scalar kernels used by the SVM objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKernel {
    /// `smax_μ([c, −c])`, a smooth `|c|`.
    Abs,
    /// `smax_μ([0, c])`, a smooth `max{0, c}`.
    Hinge,
}

impl ScalarKernel {
    /// Value and the first four derivatives with respect to `c`.
    ///
    /// `mu` must be positive; callers validate it once at construction.
    pub fn derivatives(self, c: f64, mu: f64) -> [f64; 5] {
        let t = c / mu;
        match self {
            ScalarKernel::Abs => {
                let e = (-2.0 * t.abs()).exp();
                let value = c.abs() + mu * e.ln_1p();
                let th = t.tanh();
                let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
                [
                    value,
                    th,
                    sech2 / mu,
                    -2.0 * th * sech2 / (mu * mu),
                    sech2 * (6.0 * th * th - 2.0) / (mu * mu * mu),
                ]
            }
            ScalarKernel::Hinge => {
                let e = (-t.abs()).exp();
                let value = c.max(0.0) + mu * e.ln_1p();
                let (s, s1) = if t >= 0.0 {
                    (1.0 / (1.0 + e), e / (1.0 + e))
                } else {
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                };
                let w = s * s1;
                [
                    value,
                    s,
                    w / mu,
                    w * (s1 - s) / (mu * mu),
                    w * (1.0 - 6.0 * w) / (mu * mu * mu),
                ]
            }
        }
    }

    pub fn value(self, c: f64, mu: f64) -> f64 {
        self.derivatives(c, mu)[0]
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "smoothing parameter must be positive, got {mu}"
        )))
    }
}

/// Smooth absolute value `|c| + μ log(1 + e^{−2|c|/μ})`.
pub fn soft_abs(c: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(ScalarKernel::Abs.value(c, mu))
}

/// Smooth hinge `max{0,c} + μ log(1 + e^{−|c|/μ})`.
pub fn soft_hinge(c: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(ScalarKernel::Hinge.value(c, mu))
}

/// `[value, d/dc, …, d⁴/dc⁴]` of [`soft_abs`].
pub fn soft_abs_derivatives(c: f64, mu: f64) -> Result<[f64; 5]> {
    check_mu(mu)?;
    Ok(ScalarKernel::Abs.derivatives(c, mu))
}

/// `[value, d/dc, …, d⁴/dc⁴]` of [`soft_hinge`].
pub fn soft_hinge_derivatives(c: f64, mu: f64) -> Result<[f64; 5]> {
    check_mu(mu)?;
    Ok(ScalarKernel::Hinge.derivatives(c, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fd_directional, rng};
    use rand::Rng;

    fn state(z: &[f64], mu: f64) -> SoftmaxState {
        SoftmaxState::new(z, mu).unwrap()
    }

    /// Directional derivatives of log-sum-exp are the cumulants of `h` under
    /// the weights `p`, scaled by `μ^{1−k}`. Computed directly from the
    /// definition, independent of the derivative recursions.
    fn cumulants(z: &[f64], mu: f64, h: &[f64]) -> [f64; 4] {
        let mx = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = z.iter().map(|v| ((v - mx) / mu).exp()).collect();
        let s: f64 = w.iter().sum();
        let mean: f64 = w.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / s;
        let moment = |k: i32| {
            w.iter()
                .zip(h)
                .map(|(a, b)| a * (b - mean).powi(k))
                .sum::<f64>()
                / s
        };
        let var = moment(2);
        [
            mean,
            var / mu,
            moment(3) / (mu * mu),
            (moment(4) - 3.0 * var * var) / (mu * mu * mu),
        ]
    }

    #[test]
    fn value_examples() {
        assert!((smax_value(&[0.0, 0.0], 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((smax_value(&[10.0, 0.0], 0.1).unwrap() - 10.0).abs() < 1e-12);
        let expected = 3.0 + 0.5 * (1.0 + (-4f64).exp() + (-2f64).exp()).ln();
        let v = smax_value(&[3.0, 1.0, 2.0], 0.5).unwrap();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 3.071_465_8).abs() < 1e-7);
    }

    #[test]
    fn value_rejects_bad_mu() {
        assert!(smax_value(&[1.0], 0.0).is_err());
        assert!(smax_value(&[1.0], -1.0).is_err());
        assert!(smax_value(&[f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn value_does_not_overflow() {
        let z = [1e6, -1e6, 3.0];
        let v = smax_value(&z, 1.0).unwrap();
        assert_eq!(v, 1e6);
        let v = smax_value(&[-1e8, -1e8], 1e-2).unwrap();
        assert!((v - (-1e8 + 1e-2 * 2f64.ln())).abs() < 1e-7);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(state(&[0.0, 0.0], 1.0).grad(), &[0.5, 0.5]);
        let g = state(&[1.0, 0.0], 1.0).grad().to_vec();
        assert!((g[0] - 0.731_058_6).abs() < 1e-7 && (g[1] - 0.268_941_4).abs() < 1e-7);
        // finite-difference check of the same example
        for (i, gi) in g.iter().enumerate() {
            let mut e = [0.0; 2];
            e[i] = 1.0;
            let fd = fd_directional(|t| smax_value(&[1.0 + t * e[0], t * e[1]], 1.0).unwrap(), 1);
            assert!((fd - gi).abs() < 1e-8);
        }
        let g = state(&[100.0, 0.0], 0.01).grad().to_vec();
        assert!((g[0] - 1.0).abs() <= 1e-15 && g[1].abs() <= 1e-15);
    }

    #[test]
    fn hessian_examples() {
        let s = state(&[0.0, 0.0], 1.0);
        assert_eq!(s.hess_apply(&[1.0, -1.0]).unwrap(), vec![0.5, -0.5]);
        let s = state(&[0.3, -1.2, 2.0], 0.7);
        let hv = s.hess_apply(&[1.0, 1.0, 1.0]).unwrap();
        assert!(hv.iter().all(|v| v.abs() < 1e-15));
        assert!(s.hess_apply(&[1.0]).is_err());
    }

    #[test]
    fn third_and_fourth_examples() {
        let s = state(&[0.0, 0.0], 1.0);
        let (_, s3) = s.third_form(&[1.0, -1.0]).unwrap();
        assert_eq!(s3, 0.0);
        assert!((s.fourth_dir(&[1.0, -1.0]).unwrap() + 2.0).abs() < 1e-14);
        // 4th derivative of t ↦ log(2 cosh t) at 0, by finite differences
        let fd = fd_directional(|t| (2.0 * t.cosh()).ln(), 4);
        assert!((fd + 2.0).abs() < 1e-3);

        let s = state(&[0.3, -1.2, 2.0], 0.7);
        assert!(s.fourth_dir(&[2.0, 2.0, 2.0]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn derivative_forms_match_cumulants() {
        let mut r = rng(17);
        for _ in 0..500 {
            let m = r.random_range(2..9);
            let mu = [0.05, 0.1, 1.0, 3.0][r.random_range(0..4)];
            let z: Vec<f64> = (0..m).map(|_| r.random_range(-5.0..5.0)).collect();
            let h: Vec<f64> = (0..m).map(|_| r.random_range(-2.0..2.0)).collect();
            let s = state(&z, mu);
            let k = cumulants(&z, mu, &h);
            let scale = vec::norm2(&h);
            assert!((vec::dot(s.grad(), &h) - k[0]).abs() <= 1e-12 * scale);
            let q = s.hess_form(&h, &h).unwrap();
            assert!((q - k[1]).abs() <= 1e-12 * scale.powi(2) / mu);
            let (v3, t3) = s.third_form(&h).unwrap();
            assert!((t3 - k[2]).abs() <= 1e-11 * scale.powi(3) / (mu * mu));
            assert!((vec::dot(&v3, &h) - k[2]).abs() <= 1e-11 * scale.powi(3) / (mu * mu));
            let t4 = s.fourth_dir(&h).unwrap();
            assert!((t4 - k[3]).abs() <= 1e-10 * scale.powi(4) / mu.powi(3));
        }
    }

    #[test]
    fn third_mixed_is_symmetric() {
        let s = state(&[0.4, -0.1, 1.3, 0.0], 0.5);
        let a = [1.0, -0.5, 0.3, 2.0];
        let b = [0.2, 0.1, -1.0, 0.5];
        let ab = s.third_mixed(&a, &b).unwrap();
        let ba = s.third_mixed(&b, &a).unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x - y).abs() < 1e-14);
        }
        let (v3, _) = s.third_form(&a).unwrap();
        let aa = s.third_mixed(&a, &a).unwrap();
        for (x, y) in v3.iter().zip(&aa) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_examples() {
        for mu in [0.1, 1.0, 2.5] {
            assert!((soft_abs(0.0, mu).unwrap() - mu * 2f64.ln()).abs() < 1e-15);
        }
        assert!((soft_hinge(0.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(soft_hinge(-50.0, 0.1).unwrap().abs() <= 1e-15);
        assert!((soft_hinge(50.0, 0.1).unwrap() - 50.0).abs() <= 1e-12);
        assert!(soft_abs(1.0, 0.0).is_err());
        assert!(soft_hinge(1.0, -2.0).is_err());
        assert!(soft_abs_derivatives(1.0, 0.0).is_err());
    }

    #[test]
    fn kernels_agree_with_two_point_softmax() {
        let mut r = rng(23);
        for _ in 0..200 {
            let c = r.random_range(-4.0..4.0);
            let mu = r.random_range(0.05..2.0);
            let d = r.random_range(-1.0..1.0);
            let abs = soft_abs_derivatives(c, mu).unwrap();
            let hinge = soft_hinge_derivatives(c, mu).unwrap();
            let sa = state(&[c, -c], mu);
            let sh = state(&[0.0, c], mu);
            let ha = [d, -d];
            let hh = [0.0, d];
            let ka = [
                vec::dot(sa.grad(), &ha),
                sa.hess_form(&ha, &ha).unwrap(),
                sa.third_form(&ha).unwrap().1,
                sa.fourth_dir(&ha).unwrap(),
            ];
            let kh = [
                vec::dot(sh.grad(), &hh),
                sh.hess_form(&hh, &hh).unwrap(),
                sh.third_form(&hh).unwrap().1,
                sh.fourth_dir(&hh).unwrap(),
            ];
            assert!((abs[0] - sa.value()).abs() < 1e-12);
            assert!((hinge[0] - sh.value()).abs() < 1e-12);
            for k in 0..4 {
                let da = abs[k + 1] * d.powi(k as i32 + 1);
                let dh = hinge[k + 1] * d.powi(k as i32 + 1);
                let tol = 1e-10 / mu.powi(k as i32);
                assert!(
                    (da - ka[k]).abs() < tol,
                    "abs order {} {da} {}",
                    k + 1,
                    ka[k]
                );
                assert!(
                    (dh - kh[k]).abs() < tol,
                    "hinge order {} {dh} {}",
                    k + 1,
                    kh[k]
                );
            }
        }
    }
}
