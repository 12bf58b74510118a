use thiserror::Error;

/// Errors surfaced by the statistics, samplers and the Monte Carlo harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    InvalidDimension,

    #[error("window side lengths must be strictly positive, got {0}")]
    InvalidSideLength(f64),

    #[error("window volume {0} is not 1 within tolerance")]
    NotUnitVolume(f64),

    #[error("sample size {0} too small: at least {1} points required")]
    TooFewPoints(usize, usize),

    #[error("coordinate {value} at point {index} is not finite")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("point {index} lies outside the observation window")]
    PointOutsideWindow { index: usize },

    #[error("radius {r} out of range: must satisfy 0 < r <= {max}")]
    RadiusOutOfRange { r: f64, max: f64 },

    #[error("beta = {beta} out of range: must exceed {min}")]
    BetaOutOfRange { beta: f64, min: f64 },

    #[error("points {i} and {j} coincide; negative beta requires distinct points")]
    DuplicatePoints { i: usize, j: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment constraints violated: {0}")]
    InvalidMoments(String),

    #[error("rejection sampling exceeded {0} attempts; parameters are degenerate")]
    RejectionOverflow(u64),

    #[error("perturbation evaluated to {value}, outside its declared bound {bound}")]
    PerturbationOutOfBound { value: f64, bound: f64 },

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("missing critical value for cell {0}")]
    MissingCriticalValue(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
