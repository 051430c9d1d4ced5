use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Hermitian eigensolver did not converge within {0} iterations")]
    EigNoConvergence(usize),

    #[error("invalid spin quantum number {0}: must be a positive half-integer")]
    InvalidSpin(f64),

    #[error("invalid spin projection m = {m} for s = {s}")]
    InvalidProjection { s: f64, m: f64 },

    #[error("site index {site} out of range for a system of {n_sites} sites")]
    InvalidSite { site: usize, n_sites: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not pure (purity {purity}); the exact propagator needs a pure input")]
    NotPure { purity: f64 },

    #[error("propagator normalization vanished at t = {t} ps; use a shorter time")]
    VanishingNormalization { t: f64 },

    #[error("invariant monitor tripped at t = {t} ps: {reason}; reduce the time step")]
    Monitor { t: f64, reason: String },

    #[error("non-finite value encountered at t = {t} ps")]
    NonFinite { t: f64 },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("state specification `{spec}`: {reason}")]
    StateSpec { spec: String, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error came from a numerical monitor during integration.
    pub fn is_numerical_abort(&self) -> bool {
        matches!(
            self,
            Error::Monitor { .. } | Error::NonFinite { .. } | Error::VanishingNormalization { .. }
        )
    }
}
