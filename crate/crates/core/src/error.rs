use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("factorial of negative integer {0}")]
    NegativeFactorial(i64),

    #[error("matrix is not square ({rows} rows, row {row} has {cols} columns)")]
    NonSquare { rows: usize, row: usize, cols: usize },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("matrix is singular")]
    Singular,

    #[error("{what} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("parity mismatch: walk position {z} is not reachable on line {r}")]
    ParityMismatch { r: i64, z: i64 },

    #[error("degenerate lower parameter: a lower Pochhammer symbol vanishes at j = {0}")]
    DegenerateLowerParameter(u32),

    #[error("invalid hexagon ({a}, {b}, {c}): {reason}")]
    InvalidSpec {
        a: i64,
        b: i64,
        c: i64,
        reason: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("enumeration budget of {0} configurations exceeded")]
    BudgetExceeded(u64),

    #[error("dead state on line {r}: configuration cannot reach the final line")]
    DeadState { r: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series does not decay fast enough: bound {bound:e} after {terms} terms")]
    InsufficientDecay { terms: usize, bound: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
