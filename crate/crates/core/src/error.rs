use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not unimodular (ad - bc = {0})")]
    NotUnimodular(String),

    #[error("representation violates a group relation: {0}")]
    RelationViolation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("backends differ; convert explicitly with to_float()")]
    BackendMismatch,

    #[error("eigenvalue {re}{im:+}i of T has modulus {modulus}, expected 1")]
    NonUnitaryEigenvalue { re: f64, im: f64, modulus: f64 },

    #[error("ill-conditioned eigenvalue clustering: {0}")]
    IllConditioned(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("q-series offsets differ ({0} vs {1})")]
    OffsetMismatch(String, String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("slash action does not produce a polynomial")]
    NonPolynomialResult,

    #[error("truncation tail bound {bound:e} exceeds tolerance {tol:e}")]
    TruncationUnreliable { bound: f64, tol: f64 },

    #[error("input is not exact: {0}")]
    InexactInput(String),

    #[error("input is inconsistent: {0}")]
    InconsistentInput(String),

    #[error("exponential-polynomial sum vanishes identically")]
    ZeroSum,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("unsupported weight {0}")]
    UnsupportedWeight(i64),

    #[error("invalid value for `{field}`: {message}")]
    Parse { field: String, message: String },
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
