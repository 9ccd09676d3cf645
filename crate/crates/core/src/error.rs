use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("metric is degenerate at {x:?}: |det g| = {det:e} <= {tol:e}")]
    DegenerateMetric { x: Vec<f64>, det: f64, tol: f64 },

    #[error("velocity is lightlike: |theta_dot| = {theta_dot:e} <= {tol:e}")]
    LightlikeVelocity { theta_dot: f64, tol: f64 },

    #[error("trajectory meets the zero section or a lightlike direction at t = {t}: |theta_dot| = {theta_dot:e}")]
    ZeroSectionOrLightlike { t: f64, theta_dot: f64 },

    #[error("coordinate clock stalls at t = {t}: |f_dot| = {rate:e}")]
    ClockStalls { t: f64, rate: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("quadrature did not converge on [{a}, {b}]")]
    QuadratureNotConverged { a: f64, b: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expression evaluation failed: {0}")]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Short machine-readable tag, used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateMetric { .. } => "DegenerateMetric",
            Error::LightlikeVelocity { .. } => "LightlikeVelocity",
            Error::ZeroSectionOrLightlike { .. } => "ZeroSectionOrLightlike",
            Error::ClockStalls { .. } => "ClockStalls",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::TooManySteps { .. } => "TooManySteps",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::Domain(_) => "DomainError",
            Error::Eval(_) => "EvalError",
            Error::Parse(_) => "ParseError",
        }
    }
}

impl From<crate::quadrature::NotConverged> for Error {
    fn from(e: crate::quadrature::NotConverged) -> Self {
        Error::QuadratureNotConverged { a: e.a, b: e.b }
    }
}

pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}
