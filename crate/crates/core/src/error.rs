use crate::family::Word;

/// Best value found before an enumeration ran out of budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialBound {
    pub value: f64,
    pub witness: Option<Word>,
    pub words_evaluated: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JsrError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("computation failed: {0}")]
    ComputationFailure(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("overflow while forming the power A^{k}; pre-scale the matrix and retry")]
    Overflow { k: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed word: index {index} out of range for a family of {m} members")]
    MalformedWord { index: usize, m: usize },

    #[error("budget of {budget} exceeded (needed {needed})")]
    BudgetExceeded {
        budget: u64,
        needed: u64,
        partial: Option<Box<PartialBound>>,
    },

    #[error("singular transform: {0}")]
    SingularTransform(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// Unreadable input document. `line` and `column` are 1-based and 0
    /// when the problem is structural rather than syntactic.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { message: String, line: usize, column: usize },

    #[error("stale certificate: residual {residual:e} above threshold {threshold:e}")]
    StaleCertificate { residual: f64, threshold: f64 },
}

pub type Result<T, E = JsrError> = std::result::Result<T, E>;
