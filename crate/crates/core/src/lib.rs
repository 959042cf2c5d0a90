//! Higher-order smoothing and third-order accelerated minimization of
//! non-smooth convex objectives.
//!
//! The softmax `μ log Σ exp(zᵢ/μ)` is smooth not only in the usual sense but
//! has a bounded fourth derivative (`|∇⁴[h⁴]| ≤ 15‖h‖⁴/μ³`). Composing it with
//! a linear map gives objectives whose third derivative is Lipschitz, which
//! an accelerated method built on quartic-regularized third-order Taylor
//! models can exploit. This crate provides:
//!
//! * [`softmax`]: the stable softmax calculus up to order four;
//! * [`objectives`]: smoothed ℓ∞ regression, ℓ1-SVM and ℓ4-SVM;
//! * [`model`]: the regularized Taylor model and its minimizer;
//! * [`accel`]: the accelerated outer loop with its ρ search and restarts;
//! * [`baselines`]: accelerated gradient and subgradient comparators;
//! * [`io`], [`instances`], [`report`]: file formats, generators and traces.

// `!(x > 0.0)` is how parameter checks reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense kernels index several arrays in lockstep.
#![allow(clippy::needless_range_loop)]

pub mod accel;
pub mod baselines;
pub mod dense;
pub mod error;
pub mod fdcheck;
pub mod instances;
pub mod io;
pub mod model;
pub mod objectives;
pub mod report;
pub mod softmax;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
