use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("denoiser divergence is {0}, correction undefined")]
    DegenerateDenoiser(f64),

    #[error("circuit binding {0} cannot be resolved")]
    UnresolvedBinding(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param_err(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn dim_err(
    context: &'static str,
    expected: impl ToString,
    found: impl ToString,
) -> Error {
    Error::Dimension {
        context,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
