use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter t = {t} outside the open domain ({lo}, {hi})")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("torsion L^{j} vanishes near t = {t}")]
    SingularTorsion { j: usize, t: f64 },

    #[error("tuple must be strictly ordered and tie-free: {0}")]
    OrderError(String),

    #[error("L vanishes at t = {t}; ratio undefined")]
    ZeroTorsion { t: f64 },

    #[error("wrong parameter count: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("quadrature failed to converge: estimate {estimate}, error {error}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("convex hull is degenerate (volume below {0:e})")]
    DegenerateHull(f64),

    #[error("decomposition produced more than {0} pieces; hypotheses likely violated")]
    Complexity(usize),

    #[error("covering would exceed {0} boxes")]
    Resolution(usize),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration at {field}: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
