use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QottoError {
    #[error("matrix is not Hermitian: max|M - M†| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("inverse temperature must be finite or +inf and non-negative, got {beta}")]
    InvalidBeta { beta: f64 },

    #[error("eigenvalue clamp of {clamp:.3e} exceeds 1e-9")]
    ClampTooLarge { clamp: f64 },

    #[error("state is not diagonal in the energy eigenbasis: off-diagonal norm {off_diagonal:.3e}")]
    NotDiagonal { off_diagonal: f64 },

    #[error("entropy {target} is unattainable; attainable range is [{min}, {max}]")]
    UnattainableEntropy { target: f64, min: f64, max: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("propagation did not converge: doubling to {steps} steps changed a population by {change:.3e}")]
    NonConvergence { steps: usize, change: f64 },

    #[error("isentropic strokes violated: |S_B - S_A| = {ab:.3e}, |S_D - S_C| = {cd:.3e}")]
    EntropyMismatch { ab: f64, cd: f64 },
}

pub type Result<T> = std::result::Result<T, QottoError>;
