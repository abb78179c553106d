use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    /// Cancellation or loss of positivity that survived one precision doubling.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("series did not converge after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("step size underflow at z = {z}")]
    StepUnderflow { z: String },

    #[error("degenerate evaluation point: {0}")]
    Degenerate(String),

    #[error("backend disagreement: {0}")]
    BackendMismatch(String),

    #[error("resonant alpha: factor {0} vanishes")]
    Resonance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
