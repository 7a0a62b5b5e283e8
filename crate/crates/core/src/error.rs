use thiserror::Error;

/// Errors raised by the geometry, search, codebook and encounter layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("beam count {n} outside [1, {max}]")]
    BeamCount { n: usize, max: usize },

    #[error("angle {theta} rad outside coverage ({lo}, {hi})")]
    OutOfCoverage { theta: f64, lo: f64, hi: f64 },

    #[error("angle {theta} rad is below coverage start {lo}; train has not entered yet")]
    NotYetEntered { theta: f64, lo: f64 },

    #[error("singular geometry at {theta} rad (sin = 0)")]
    SingularGeometry { theta: f64 },

    #[error("time {t} s outside encounter window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },

    #[error("rate {requested} bit/s/Hz exceeds the single-train maximum {max}")]
    InfeasibleRate { requested: f64, max: f64 },

    #[error("trajectory times must be strictly increasing (sample {index})")]
    NonMonotoneTime { index: usize },

    #[error("malformed codebook CSV at line {line}: {reason}")]
    CodebookCsv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
