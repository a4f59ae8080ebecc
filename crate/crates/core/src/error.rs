use thiserror::Error;

/// Failure while evaluating a right-hand side or Jacobian.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    /// The state left the domain on which the model is defined, e.g. a
    /// negative oil volume in a reservoir cell.
    #[error("state outside model domain: {0}")]
    Domain(String),
    #[error("input signal: {0}")]
    Signal(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearSolveError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix pattern differs from the factorized pattern")]
    PatternMismatch,
    #[error("non-finite matrix entry at value index {index}")]
    NonFinite { index: usize },
    #[error("structurally singular matrix (no pivot at step {index})")]
    StructurallySingular { index: usize },
    #[error("numerically singular matrix (non-finite solution component {index})")]
    NumericallySingular { index: usize },
    #[error("solve requested before factorization")]
    NotFactored,
    #[error("sparse backend: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PodError {
    #[error("empty state history")]
    EmptyHistory,
    #[error("time index {index} outside history of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("snapshot window must be at least 1")]
    ZeroWindow,
    #[error("snapshot states have inconsistent dimensions")]
    RaggedHistory,
    #[error("snapshot matrix is zero; no basis can be formed")]
    ZeroSnapshots,
    #[error("singular value decomposition failed: {0}")]
    Svd(String),
}
