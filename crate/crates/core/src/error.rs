use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("bad subsystem dimensions: {0}")]
    BadDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("channel is not in the projective-output class: {0}")]
    NotProjectiveClass(String),

    #[error("invalid channel spec: {0}")]
    SpecInvalid(String),

    #[error("invalid Renyi order {0}")]
    BadAlpha(f64),

    #[error("channel is not weakly covariant (covariance residual {covariance:e}, average residual {average:e})")]
    NotWeaklyCovariant { covariance: f64, average: f64 },

    #[error("reference input is not output-entropy optimal: S(T(rho0)) = {reference} exceeds estimate {estimate}")]
    OptimalStateMismatch { reference: f64, estimate: f64 },

    #[error("group representations are not paired: {0}")]
    SpecMismatch(String),

    #[error("ensemble member {index} is not pure (purity {purity})")]
    NonPureEnsemble { index: usize, purity: f64 },

    #[error("channel failed validation: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
