use thiserror::Error;

use crate::flow::DiagnosticsTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve samples: {0}")]
    InvalidSamples(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("degenerate curve: parametric speed {speed:.3e} below {threshold:.3e}")]
    DegenerateCurve { speed: f64, threshold: f64 },

    #[error("rotation number {rotation:.6} differs from 1")]
    RotationNumberMismatch { rotation: f64 },

    #[error("derivative order {requested} exceeds the cap {cap} for this resolution")]
    DerivativeCapExceeded { requested: usize, cap: usize },

    #[error("interpolation ratio is degenerate (denominator {denominator:.3e})")]
    DegenerateRatio { denominator: f64 },

    #[error("signed area {area:.6e} is not positive")]
    NonPositiveArea { area: f64 },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("stiffness failure at t = {t:.6e}: {reason}")]
    StiffnessFailure { t: f64, reason: String, partial: Box<DiagnosticsTrace> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid curve spec: {0}")]
    SpecInvalid(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
