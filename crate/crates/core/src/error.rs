use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension { what: String, expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("integration of `{system}` diverged after t = {t}")]
    Divergence { system: String, t: f64 },

    #[error("integration of `{system}` exhausted its budget of {max_steps} steps at t = {t}")]
    Budget { system: String, max_steps: usize, t: f64 },

    #[error("unknown system `{name}`; valid systems: {valid}")]
    NotFound { name: String, valid: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("expression error at offset {offset}: {message}")]
    Expr { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(what: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::Dimension {
            what: what.into(),
            expected,
            got,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for failures caused by the numerics rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::Budget { .. })
    }
}

pub(crate) fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::dim(what, expected, got))
    }
}
