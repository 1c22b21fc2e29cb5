use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The Choquet integral of the loss does not exist for this contour.
    #[error("loss is not previsible: {0}")]
    NonPrevisible(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}

impl Error {
    /// True for failures of a numerical (rather than argument) nature.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonPrevisible(_) | Error::Divergent(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
