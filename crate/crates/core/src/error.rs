use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `h + h''` (support form) or the discrete curvature (marker form)
    /// dropped to or below the convexity threshold at `index`.
    #[error("convexity lost at sample {index} (value {value:e})")]
    ConvexityLost { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("non-finite or inconsistent value: {0}")]
    NonFinite(String),

    #[error("degenerate chord between samples {i} and {j}")]
    DegenerateChord { i: usize, j: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("I/O failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::ConfigInvalid(msg.into())
    }

    pub(crate) fn non_finite(msg: impl Into<String>) -> Self {
        Error::NonFinite(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
