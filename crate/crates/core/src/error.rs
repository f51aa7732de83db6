use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("collocation grid too coarse for dealiasing: N = {n} but at least {required} is needed")]
    InsufficientResolution { n: usize, required: usize },

    #[error("wavenumber (0, 0) has no linear block")]
    ZeroWavenumber,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("closed-form discriminant requires inviscid parameters (nu = kappa_T = kappa_M = 0)")]
    NotInviscid,

    #[error("family is not orthonormal: max Gram deviation {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },

    #[error("empty averaging window starting at t = {t_start}")]
    EmptyWindow { t_start: f64 },

    #[error("integration blew up at t = {t}: max |coefficient| {max_abs:.3e} at mode ({k1}, {k2})")]
    BlowUp { t: f64, k1: i64, k2: i64, max_abs: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.to_string(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
