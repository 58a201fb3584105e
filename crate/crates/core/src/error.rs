use thiserror::Error;

/// Errors surfaced by state construction and classification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot trace out all subsystems")]
    EmptyKeep,

    #[error("partial transpose over {0} is degenerate (equals global transpose or identity)")]
    DegenerateTranspose(&'static str),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("factor permutation is not a bijection")]
    InvalidPermutation,

    #[error("factor index {index} out of range for {count} factors")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("matrix dimension {dim} does not match shape dimension {shape_dim}")]
    ShapeMismatch { dim: usize, shape_dim: usize },

    #[error("total dimension {dim} exceeds the dense-storage bound {max}")]
    DimensionBound { dim: usize, max: usize },

    #[error("trace deviates from one by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("outside state space (positivity violated): c[{k},{l}] = {value:.6e}")]
    OutsideStateSpace { k: usize, l: usize, value: f64 },

    #[error("line family requires d = 3 (got d = {0})")]
    LineFamilyDimension(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bipartition does not cover the parties exactly once")]
    InvalidBipartition,

    #[error("party count {0} exceeds the bipartition enumeration bound {1}")]
    PartyBound(usize, usize),

    #[error("state vector is not normalized (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("protocol aborts: projection annihilates state (trace {trace:.3e})")]
    ProtocolAborted { trace: f64 },

    #[error("two-copy dimension {dim} exceeds the dense protocol bound {max}; use the coefficient path")]
    ProtocolDimensionBound { dim: usize, max: usize },

    #[error("scan budget exceeded: estimated {estimated} point-checks, budget {budget}")]
    BudgetExceeded { estimated: u64, budget: u64 },

    #[error("scan specs are incomparable: {0}")]
    IncomparableSpecs(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
