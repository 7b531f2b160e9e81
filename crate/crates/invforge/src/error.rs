use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be in 2..=16, got {0}")]
    Dimension(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label index out of range for dimension {dim}: {label}")]
    IndexOutOfRange { label: String, dim: usize },
    #[error("invalid operator label: {0}")]
    InvalidLabel(String),
    #[error("cannot parse operator token `{0}`")]
    TokenParse(String),
    #[error("exponent 0 is the identity; handle it separately")]
    IdentityPower,
    #[error("incomplete count data: missing projector record {0}")]
    IncompleteCounts(String),
    #[error("unknown channel family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` is qubit-only but dimension {dim} was requested")]
    QubitOnly { family: String, dim: usize },
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("parameter `{name}` = {value} outside [{lo}, {hi}]")]
    ParamOutOfBounds {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("simplex constraint violated: weighted sum {sum} too far from 1")]
    SimplexViolation { sum: f64 },
    #[error("damping rates for level {level} sum to {sum} > 1")]
    RateOverflow { level: usize, sum: f64 },
    #[error("Kraus set is not trace preserving: max |sum E'E - 1| entry = {deviation:.3e}")]
    CptpViolation { deviation: f64 },
    #[error("not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("channel spec parse error at line {line}, column {column}: {message}")]
    SpecParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("channel spec is inconsistent: {0}")]
    SpecInvalid(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("channel family has an empty parameter domain")]
    EmptyParamDomain,
    #[error("family admits no invariants to encode in")]
    NoInvariants,
    #[error("sampling budget of {budget} draws exhausted after keeping {kept} of {wanted} symbols")]
    SamplingBudget {
        budget: usize,
        kept: usize,
        wanted: usize,
    },
    #[error("invariant is undefined on {undefined} of {total} draws; resample budget exhausted")]
    UndefinedBudget { undefined: usize, total: usize },
    #[error("unknown symbol id {0} in message")]
    UnknownSymbol(usize),
    #[error("{0}")]
    BadArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
