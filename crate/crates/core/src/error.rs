use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChargeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular normalization at mu = {re} + {im}i")]
    SingularPoint { re: f64, im: f64 },

    #[error("eigenvalue 1 eigenspace is not one-dimensional (second singular value {second:e})")]
    DegenerateEigenspace { second: f64 },

    #[error("eigenvalue 1 sits in a Jordan chain (|left . right| = {overlap:e})")]
    JordanChain { overlap: f64 },

    #[error("too close to a pole of the charge (|w.v| relative = {overlap:e})")]
    PoleProximity { overlap: f64 },

    #[error("polynomial division is not exact")]
    NotDivisible,

    #[error("all adjugate columns vanish identically")]
    AdjugateVanishes,

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("expected degree gap 2 between denominator and numerator, found {0}")]
    DegreeGap(i64),

    #[error("root finder did not converge (residual {residual:e})")]
    RootFinder { residual: f64 },

    #[error("{0} is only defined for jj = 1")]
    WrongRepresentation(&'static str),

    #[error("no Jordan block at the requested point: {0}")]
    PoleMismatch(String),

    #[error("quadrature failed to reach tolerance (error estimate {0:e})")]
    Quadrature(f64),

    #[error("exact arithmetic invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ChargeError {
    fn from(e: std::io::Error) -> Self {
        ChargeError::Io(e.to_string())
    }
}

impl From<csv::Error> for ChargeError {
    fn from(e: csv::Error) -> Self {
        ChargeError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ChargeError>;
