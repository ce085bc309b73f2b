//! Crate-wide error type.

use thiserror::Error;

use crate::game::GameError;
use crate::stats::StatsError;

/// Anything that can go wrong building or running an experiment.
#[derive(Debug, Error)]
pub enum ArenaError {
    /// Invalid stage-game value.
    #[error(transparent)]
    Game(#[from] GameError),
    /// Invalid statistics argument.
    #[error(transparent)]
    Stats(#[from] StatsError),
    /// A learner/environment spec string could not be parsed.
    #[error("unknown spec `{token}`: {reason}")]
    Spec {
        /// The offending token, verbatim.
        token: String,
        /// Why it was rejected.
        reason: String,
    },
    /// A structurally valid but unusable configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed JSON input.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl ArenaError {
    /// Usage errors exit 2, I/O errors exit 3 (acceptance failures exit 1
    /// elsewhere).
    pub fn exit_code(&self) -> i32 {
        match self {
            ArenaError::Io(_) => 3,
            _ => 2,
        }
    }

    /// Shorthand for a spec-token error.
    pub fn spec(token: &str, reason: impl Into<String>) -> Self {
        ArenaError::Spec {
            token: token.to_string(),
            reason: reason.into(),
        }
    }
}
