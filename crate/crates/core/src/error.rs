use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state does not purify the given density matrix (deviation {deviation:.3e})")]
    NotAPurification { deviation: f64 },

    #[error("instance verification failed: {0}")]
    VerificationFailed(String),

    #[error("numerical defect: {0}")]
    NumericalDefect(String),

    #[error("reduced states too close to orthogonalize (epsilon = {epsilon:.3e})")]
    TooClose { epsilon: f64 },

    #[error("calibration error: {0}")]
    Calibration(String),
}
