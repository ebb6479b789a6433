use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The state violates the uncertainty relation or is not positive semidefinite.
    #[error("state is not physical: {0}")]
    NotPhysical(String),

    /// A measured noise level lies below what the stated loss allows.
    #[error("unphysical input: linear noise ratio {ratio} is at or below the loss floor {floor} for eta = {eta}")]
    Unphysical { ratio: f64, floor: f64, eta: f64 },

    #[error("{quantity} = {value} is outside the valid range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("span too narrow: {0}")]
    SpanTooNarrow(String),

    #[error("trace grids do not match: {0}")]
    GridMismatch(String),

    #[error("degenerate calibration at bin {bin} ({frequency_hz} Hz): vacuum power {vacuum} does not exceed dark power {dark}")]
    DegenerateCalibration {
        bin: usize,
        frequency_hz: f64,
        vacuum: f64,
        dark: f64,
    },

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("insufficient time-series length: {got} samples, need at least {need}")]
    InsufficientLength { got: usize, need: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
