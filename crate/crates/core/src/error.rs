use alloc::string::String;

/// Errors reported by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("coefficient vector has length {got}, expected {expected} for band {band}")]
    BandMismatch {
        band: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("Lebesgue exponent must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("quadrature grid with {points} nodes is not exact for degree {degree}")]
    GridTooCoarse { points: usize, degree: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("all importance weights are zero")]
    DegenerateWeights,
    #[error("effective sample size {ess:.1} is below the required {required}")]
    EffectiveSampleSize { ess: f64, required: f64 },
    #[error("insufficient tail data: {exceedances} exceedances at the smallest threshold, need {required}")]
    InsufficientTail { exceedances: usize, required: usize },
    #[error("density exponent {0} exceeds the overflow guard")]
    ExponentOverflow(f64),
    #[error("state became non-finite at t = {t}")]
    FlowBlowUp { t: f64 },
    #[error("mass drift {drift:e} exceeds tolerance {tolerance:e} at t = {t}")]
    MassDrift { t: f64, drift: f64, tolerance: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
