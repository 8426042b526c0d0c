use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{field}: {reason}")]
    InvalidParams { field: String, reason: String },

    #[error("system is not asymptotically stable (max Re(eig A) = {max_re:.6e})")]
    Unstable { max_re: f64 },

    #[error("eigenvalue solver failed")]
    EigenFailure,

    #[error("resolvent (i*omega*I - A) is singular or ill-conditioned at omega = {omega}")]
    SingularResolvent { omega: f64 },

    #[error("grid too short: impulse-response tail {tail:.3e} exceeds {tol:.1e}")]
    GridTooShort { tail: f64, tol: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("normalization constant {value:.6e} is not positive")]
    NonPositiveNorm { value: f64 },

    #[error("degenerate state: normalization {value:.6e} is below {tol:.1e}")]
    ZeroNorm { value: f64, tol: f64 },

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("the passive solver was given an active system (C+ or Omega+ nonzero)")]
    NotPassive,

    #[error("mode basis is not orthonormal: Gram deviation {0:.3e}")]
    NonOrthonormalBasis(f64),

    #[error("photon number mismatch: occupation sums to {got}, state carries {expected}")]
    PhotonNumberMismatch { got: usize, expected: usize },

    #[error("mode dictionary: {0}")]
    Dictionary(String),

    #[error("truncation tail {tail:.3e} exceeds {tol:.1e}")]
    Truncation { tail: f64, tol: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
