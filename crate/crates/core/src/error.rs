use thiserror::Error;

use crate::bifiltration::ParamPoint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("parameter a = {0} is outside the open interval (0, 1)")]
    InvalidParam(f64),

    #[error("complexes differ: {0}")]
    ComplexMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("diagram degrees differ ({0} vs {1})")]
    DegreeMismatch(usize, usize),

    #[error("matching enumeration cap exceeded: {points} points > cap {cap}")]
    CapExceeded { points: usize, cap: usize },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("point {0} is not in the start diagram")]
    NotInDiagram(String),

    #[error("singularity encountered at s = {s:.6} near ({}, {})", at.a, at.b)]
    SingularityEncountered { at: ParamPoint, s: f64 },

    #[error("region violation at s = {s:.6} near ({}, {}): {reason}", at.a, at.b)]
    RegionViolation { at: ParamPoint, s: f64, reason: String },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("unknown example id `{0}`")]
    UnknownExample(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or out-of-range input, as opposed to
    /// failures of a computation on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidComplex(_)
                | Error::InvalidParam(_)
                | Error::ComplexMismatch(_)
                | Error::Domain(_)
                | Error::DegreeMismatch(..)
                | Error::InvalidMatching(_)
                | Error::NotInDiagram(_)
                | Error::InvalidRegion(_)
                | Error::UnknownExample(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
