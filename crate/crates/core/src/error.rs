use std::path::PathBuf;

/// Errors raised by the numerical kernels, the solvers and the file readers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row} is below {threshold})")]
    NotPositiveDefinite {
        row: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("shifted softmax Hessian is singular (Sherman-Morrison denominator {denominator:e})")]
    SingularShift { denominator: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model minimization hit the iteration cap ({iterations}) with residual {residual:e} > {tolerance:e}")]
    InnerCap {
        iterations: usize,
        residual: f64,
        tolerance: f64,
        best: Vec<f64>,
    },

    #[error(
        "rho search failed to reach the window after {probes} probes (bracket [{lo:e}, {hi:e}])"
    )]
    RhoSearch { probes: usize, lo: f64, hi: f64 },

    #[error("uniform convexity modulus {sigma} falsified by sampling: {detail}")]
    UniformConvexity { sigma: f64, detail: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
