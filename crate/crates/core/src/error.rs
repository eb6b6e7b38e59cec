use thiserror::Error;

/// Errors raised by validation, decomposition and conversion routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PovmError {
    #[error("matrix is not Hermitian (max |H - H^dagger| entry = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not positive semidefinite (min eigenvalue = {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("effect {index} exceeds the identity (max eigenvalue = {max_eigenvalue:e})")]
    EffectExceedsIdentity { index: usize, max_eigenvalue: f64 },

    #[error("effects do not sum to the identity (residual={residual:e})")]
    NotNormalized { residual: f64 },

    #[error("effect {index} ({label:?}) is the zero operator")]
    ZeroEffect { index: usize, label: String },

    #[error("duplicate outcome label {0:?}")]
    DuplicateLabel(String),

    #[error("density matrix has trace {trace} instead of 1")]
    NotUnitTrace { trace: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("convex weight {0} is outside the open interval (0, 1)")]
    WeightOutOfRange(f64),

    #[error("not a projection valued measure (idempotency defect={idempotency:e}, orthogonality defect={orthogonality:e})")]
    NotPvm {
        idempotency: f64,
        orthogonality: f64,
    },

    #[error("cannot split {dim} columns into {groups} nonempty groups")]
    BadPartition { dim: usize, groups: usize },

    #[error("sum of random effects is singular")]
    SingularSum,

    #[error("effects {k} and {l} do not commute (commutator norm = {norm:e})")]
    NotCommutative { k: usize, l: usize, norm: f64 },

    #[error("effects {k} and {l} are orthogonal; the witness is trivial")]
    OrthogonalPair { k: usize, l: usize },

    #[error("perturbation leaves every effect unchanged")]
    TrivialPerturbation,

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("perturbation produced a zero effect at index {0}")]
    ZeroEffectProduced(usize),

    #[error("kernel is not a valid Markov kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel is not deterministic (max distance to {{0,1}} = {distance:e})")]
    NotDeterministic { distance: f64 },

    #[error("joint diagonalization does not reproduce the effects (residual={residual:e})")]
    ReconstructionFailed { residual: f64 },

    #[error("random generation failed after {0} attempts")]
    RetryExhausted(usize),

    #[error("theorem check failed: {0}")]
    TheoremViolation(String),

    #[error("invalid index: {0}")]
    BadIndex(String),
}

pub type Result<T, E = PovmError> = std::result::Result<T, E>;
