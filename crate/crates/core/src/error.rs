use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (symmetry defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("operator is singular (smallest singular value {smallest:.3e})")]
    Singular { smallest: f64 },

    #[error("linear system for {what} is inconsistent (residual {residual:.3e})")]
    Inconsistent { what: String, residual: f64 },

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("invariance nullspace contains no faithful positive functional")]
    NoPositiveSolution,

    #[error("invariant functional is not unique (nullity {nullity})")]
    NonUnique { nullity: usize },

    #[error("Gram matrix of the weight is not positive definite")]
    GramNotPd,

    #[error("multiplicative unitary fails unitarity (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("vectors span a space of dimension {rank}, expected {expected}")]
    SpanDeficient { rank: usize, expected: usize },

    #[error("operator leaves the represented algebra (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("polar conjugation differs from the expected phase times J (residual {residual:.3e})")]
    PhaseMismatch { residual: f64 },

    #[error("invalid quantum group spec: {0}")]
    SpecInvalid(String),

    #[error("unsupported file version {0}")]
    VersionUnsupported(u32),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn inconsistent(what: impl Into<String>, residual: f64) -> Self {
        Error::Inconsistent { what: what.into(), residual }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage { stage, source: Box::new(other) },
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
