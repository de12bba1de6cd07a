use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown map `{0}` (expected integrable, pendulum, standard or conjugated)")]
    UnknownMap(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("generating function check failed: {0}")]
    MalformedGenerating(String),

    #[error("no bracket for implicit solve at {at:?} after widening to {width}")]
    BracketNotFound { at: (f64, f64), width: f64 },

    #[error("shift window exhausted: minimum realized at the window edge (|m| = {shift})")]
    WindowExhausted { shift: i64 },

    #[error("{0} is outside the interval [{1}, {2}]")]
    OutOfRange(f64, f64, f64),

    #[error("data on the Mather set is not dominated: defect {defect:.3e} between {from} and {to}")]
    NotDominated { defect: f64, from: f64, to: f64 },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("non-bracketing covering search: {0}")]
    NonBracketing(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
