use thiserror::Error;

use crate::expr::EvalError;

/// Errors raised while evaluating or analysing a map.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("point {re}{im:+}i is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },
    #[error("finite-difference stencil of step {step} leaves the disk at {re}{im:+}i")]
    StencilOutsideDisk { re: f64, im: f64, step: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("derivative is not defined at {re}{im:+}i")]
    SingularJet { re: f64, im: f64 },
    #[error("coincident kernel arguments")]
    CoincidentPoints,
    #[error("quadrature did not converge: refinement disagreement {disagreement:e} exceeds {tolerance:e}")]
    QuadratureNonConvergence { disagreement: f64, tolerance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("newton inversion failed: {0}")]
    InversionFailed(String),
    #[error("{failed} of {total} grid points could not be evaluated")]
    TooManyFailures { failed: usize, total: usize },
    #[error("coefficient extraction failed: {0}")]
    Extraction(String),
}

impl MapError {
    pub(crate) fn outside(z: num_complex::Complex64) -> Self {
        MapError::OutsideDisk { re: z.re, im: z.im }
    }

    pub(crate) fn singular(z: num_complex::Complex64) -> Self {
        MapError::SingularJet { re: z.re, im: z.im }
    }
}

pub type Result<T, E = MapError> = std::result::Result<T, E>;
