use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension {dim} is not a power of two")]
    BadDimension { dim: usize },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("not a valid density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("probabilities are invalid (sum {sum})")]
    ProbabilityMismatch { sum: f64 },

    #[error("invalid probabilities: {reason}")]
    BadProbabilities { reason: String },

    #[error("vectors are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid partition: {reason}")]
    BadPartition { reason: String },

    #[error("not a valid measurement: {reason}")]
    InvalidMeasurement { reason: String },

    #[error("outcome {outcome} has probability {probability:.3e}, below the conditioning threshold")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("unknown outcome label {outcome}")]
    UnknownOutcome { outcome: usize },

    #[error("states are identical up to a global phase")]
    IdenticalStates,

    #[error("invalid bipartition {dim_a}x{dim_b} for dimension {dim}")]
    BadSplit { dim_a: usize, dim_b: usize, dim: usize },

    #[error("Kraus completeness violated (max deviation {deviation:.3e})")]
    InvalidChannel { deviation: f64 },

    #[error("invalid target qubits: {reason}")]
    BadTarget { reason: String },

    #[error("invalid circuit: {reason}")]
    InvalidCircuit { reason: String },

    #[error("circuit measures {bits} classical bits, more than the enumeration limit of {limit}")]
    TooManyBranches { bits: usize, limit: usize },

    #[error("invalid error selector: {reason}")]
    BadSelector { reason: String },

    #[error("measurement is not balanced: {reason}")]
    NotBalanced { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
