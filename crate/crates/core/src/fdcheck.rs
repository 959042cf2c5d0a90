//! Central finite differences for checking analytic derivative forms.
//!
//! Derivatives along a direction are reduced to derivatives of a scalar
//! function `φ(t) = f(x + t h)` at `t = 0`. The stencils are second-order
//! accurate; [`derivative`] adds two Richardson steps to reach sixth order.

/// Second-order central stencil for the `order`-th derivative of `phi` at 0.
pub fn central_difference(phi: impl Fn(f64) -> f64, order: usize, step: f64) -> f64 {
    let e = step;
    match order {
        1 => (phi(e) - phi(-e)) / (2.0 * e),
        2 => (phi(e) - 2.0 * phi(0.0) + phi(-e)) / (e * e),
        3 => (phi(2.0 * e) - 2.0 * phi(e) + 2.0 * phi(-e) - phi(-2.0 * e)) / (2.0 * e * e * e),
        4 => {
            (phi(2.0 * e) - 4.0 * phi(e) + 6.0 * phi(0.0) - 4.0 * phi(-e) + phi(-2.0 * e))
                / (e * e * e * e)
        }
        _ => panic!("central_difference supports orders 1 through 4, got {order}"),
    }
}

/// Default coarsest step for an `order`-th derivative when `phi` varies on
/// the length scale `scale`: `2 ε^{1/(order+6)} · scale`, balanced for the
/// extrapolated stencil.
pub fn default_step(order: usize, scale: f64) -> f64 {
    2.0 * f64::EPSILON.powf(1.0 / (order as f64 + 6.0)) * scale
}

/// Richardson-extrapolated central difference on steps `e`, `e/2`, `e/4`
/// (sixth-order accurate).
pub fn derivative(phi: impl Fn(f64) -> f64, order: usize, scale: f64) -> f64 {
    let step = default_step(order, scale);
    let d: Vec<f64> = (0..3)
        .map(|i| central_difference(&phi, order, step / f64::from(1 << i)))
        .collect();
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// `|a − b| / max(|a|, |b|, floor)`
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // φ(t) = (1 + t)^5: derivatives 5, 20, 60, 120 at 0
        let phi = |t: f64| (1.0 + t).powi(5);
        let expect = [5.0, 20.0, 60.0, 120.0];
        for (k, e) in expect.iter().enumerate() {
            let d = derivative(phi, k + 1, 1.0);
            assert!(relative_error(*e, d, 0.0) < 1e-7, "order {} got {d}", k + 1);
        }
    }

    #[test]
    fn exp_derivatives() {
        for k in 1..=4 {
            let d = derivative(f64::exp, k, 1.0);
            assert!((d - 1.0).abs() < 1e-6);
        }
    }
}
