use thiserror::Error;

use crate::state::DisentanglementReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("mixed moduli: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("{0} is not a prime modulus")]
    NotPrime(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular over F_{0}")]
    Singular(u64),
    #[error("vandermonde points are not pairwise distinct")]
    DuplicatePoints,
    #[error("vandermonde points must be nonzero")]
    ZeroPoint,
    #[error("field F_{q} too small for {n} distinct nonzero points")]
    FieldTooSmall { n: usize, q: u64 },
    #[error("invalid prime {q}: need a prime greater than {bound}")]
    InvalidPrime { q: u64, bound: u64 },
    #[error("threshold k must be at least 1")]
    InvalidThreshold,
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("control and target are the same qudit ({0})")]
    SameQudit(usize),
    #[error("duplicate qudit index {0}")]
    DuplicateIndex(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dense state would need {needed} amplitudes, budget is {budget}")]
    TooLarge { needed: u128, budget: u128 },
    #[error("bad subset size {size}: must lie in [{min}, {max}]")]
    BadSubsetSize { size: usize, min: usize, max: usize },
    #[error("party {0} is out of range or repeated")]
    BadParty(usize),
    #[error("invalid secret: {0}")]
    InvalidSecret(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(
        "recovery verification failed (secret_exact={}, residual_factorizes={})",
        .0.secret_exact,
        .0.residual_factorizes
    )]
    VerificationFailed(Box<DisentanglementReport>),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
