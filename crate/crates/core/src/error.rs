//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("spectrum outside the domain of `{kernel}` (eigenvalue {value:.3e})")]
    DomainViolation { kernel: String, value: f64 },

    #[error("state is singular (minimum eigenvalue {min_eig:.3e})")]
    SingularState { min_eig: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("jump {index} is not a modular eigenvector (residual {residual:.3e})")]
    NotModularEigenvector { index: usize, residual: f64 },

    #[error("jump {index} is not traceless (|tr V| = {trace:.3e})")]
    NotTraceless { index: usize, trace: f64 },

    #[error("generator violates detailed balance: {0}")]
    NotDbc(String),

    #[error("decomposition residual too large: {0}")]
    ResidualTooLarge(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("exponent must be nonzero")]
    ZeroExponent,

    #[error("operator is not positive semidefinite (minimum eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("generator carries no jump operators")]
    NoJumps,

    #[error("semigroup is not primitive (kernel dimension {kernel_dimension})")]
    NotPrimitive { kernel_dimension: usize },

    #[error("optimizer produced a non-finite ratio")]
    OptimizerDiverged,

    #[error("missing estimate `{0}`")]
    MissingEstimate(String),

    #[error("generators do not share their jump supports")]
    IncompatibleJumps,

    #[error("argument has a trace component {0:.3e}")]
    KernelComponent(f64),

    #[error("iterate left the positive cone (minimum eigenvalue {min_eig:.3e})")]
    LeftPositiveCone { min_eig: f64 },

    #[error("curvature must be positive, got {0}")]
    NonPositiveCurvature(f64),

    #[error("operation requires the maximally mixed invariant state")]
    NotSymmetric,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
