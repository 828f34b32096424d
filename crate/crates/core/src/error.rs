use thiserror::Error;

/// Which density-operator condition an input failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityViolation {
    NotSquare { rows: usize, cols: usize },
    NotHermitian { residual: f64 },
    Trace { deviation: f64 },
    NegativeEigenvalue { min: f64 },
}

impl std::fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, not square"),
            Self::NotHermitian { residual } => write!(f, "not Hermitian (residual {residual:e})"),
            Self::Trace { deviation } => write!(f, "trace deviates from 1 by {deviation:e}"),
            Self::NegativeEigenvalue { min } => write!(f, "negative eigenvalue {min:e}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NonSquare { rows: usize, row: usize, cols: usize },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("dimension {0} is outside the supported range")]
    InvalidDimension(usize),

    #[error("negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("column {column} sums to 1{deviation:+e}")]
    ColumnSumViolation { column: usize, deviation: f64 },

    #[error("probability vector invalid: {0}")]
    InvalidProbabilityVector(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Sinkhorn iteration did not converge (residual {residual:e})")]
    SinkhornNotConverged { residual: f64 },

    #[error("numerical computation failed: {0}")]
    ComputationFailed(String),

    #[error("invalid entropy order: {0}")]
    InvalidAlpha(String),

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(DensityViolation),

    #[error("invalid Kraus set: {0}")]
    InvalidKrausSet(String),

    #[error("matrix is not doubly stochastic")]
    NotDoublyStochastic,

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("invalid projector set: {0}")]
    InvalidProjectorSet(String),

    #[error("Kraus set is not bistochastic (unital residual {residual:e})")]
    NotBistochastic { residual: f64 },

    #[error("dilation failed the unitarity check (residual {residual:e})")]
    UnitarityCheckFailed { residual: f64 },

    #[error("residual support has no perfect matching (residual mass {residual:e})")]
    NoPerfectMatching { residual: f64 },

    #[error("decomposition exceeded {limit} terms")]
    TermLimitExceeded { limit: usize },

    #[error("invalid process configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid index {index} for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::SinkhornNotConverged { .. }
                | Error::ComputationFailed(_)
                | Error::UnitarityCheckFailed { .. }
                | Error::TermLimitExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
