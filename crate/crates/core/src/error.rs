use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (supported: 1..={max})", max = crate::tensor::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A point handed to a chart lies outside its coordinate domain.
    #[error("point {point:?} outside chart domain (coordinate {coord} not in ({lo}, {hi}))")]
    OutsideDomain {
        point: Vec<f64>,
        coord: usize,
        lo: f64,
        hi: f64,
    },

    /// An integration left the chart domain part way.
    #[error("trajectory left the chart domain at step {step} of {steps}: {source}")]
    DomainExit {
        step: usize,
        steps: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("finite-difference stencil leaves the chart domain at {point:?}")]
    StencilOutsideDomain { point: Vec<f64> },

    #[error("non-finite value encountered ({0})")]
    NonFinite(&'static str),

    #[error("quadrilateral leg {leg} failed: {source}")]
    Leg {
        leg: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("singular matrix ({0})")]
    Singular(&'static str),

    #[error("chart `{0}` carries no metric")]
    NoMetric(String),

    #[error("chart `{0}` carries no analytic Christoffel derivatives")]
    MissingDerivatives(String),

    #[error("ill-conditioned fit (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("fit failure: {0}")]
    Fit(String),

    #[error("torsion present (max |T| = {max:.3e} > {threshold:.1e}); curvature recovery needs a symmetric connection")]
    TorsionPresent { max: f64, threshold: f64 },

    #[error("{0}")]
    Config(String),
}

/// Coarse classification used to pick process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    InvalidInput,
    Domain,
    Fit,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::OutsideDomain { .. }
            | Error::DomainExit { .. }
            | Error::StencilOutsideDomain { .. }
            | Error::NonFinite(_)
            | Error::Eval(_) => ErrorClass::Domain,
            Error::Leg { source, .. } => source.class(),
            Error::IllConditioned { .. } | Error::Fit(_) | Error::TorsionPresent { .. } => {
                ErrorClass::Fit
            }
            _ => ErrorClass::InvalidInput,
        }
    }

    pub(crate) fn leg(leg: &'static str, source: Error) -> Self {
        Error::Leg {
            leg,
            source: Box::new(source),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
