use thiserror::Error;

/// Errors produced by the reconstruction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "unstable: C1 ~ 0 (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}), increase bandwidth or shrink space"
    )]
    Unstable { sigma_min: f64, sigma_max: f64 },

    #[error("quadrature did not converge at frequency {omega}")]
    Quadrature { omega: f64 },

    #[error("no dimension satisfies the stability threshold {threshold}: bandwidth too small")]
    BandwidthTooSmall { threshold: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
