use thiserror::Error;

/// Errors raised by the numerical and combinatorial routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank must be between 2 and 26, got {0}")]
    InvalidRank(usize),

    #[error("letter `{letter}` has non-positive weight {weight}")]
    NonPositiveWeight { letter: String, weight: f64 },

    #[error("expected {expected} per-letter values, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("invalid word `{0}`")]
    InvalidWord(String),

    #[error("boundary point is not reduced: {0}")]
    NotReduced(String),

    #[error("the two points coincide")]
    EqualPoints,

    #[error("fixed-point iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("critical exponent not bracketed: rho({lo})={rho_lo}, rho({hi})={rho_hi}")]
    BracketFailure {
        lo: f64,
        hi: f64,
        rho_lo: f64,
        rho_hi: f64,
    },

    #[error("Perron eigenvector computation failed: {0}")]
    PerronFailure(String),

    #[error("depth {depth} too shallow, need at least {required}")]
    DepthTooShallow { depth: usize, required: usize },

    #[error("exponent s={s} is not above the critical exponent {delta}")]
    SubcriticalS { s: f64, delta: f64 },

    #[error("Gromov product is not constant on the given cylinder pair")]
    NonConstantG,

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
