use thiserror::Error;

use crate::lp::LpError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown setting `{setting}` on side {side}")]
    UnknownSetting { side: u8, setting: String },

    #[error("invalid probability set: {0}")]
    InvalidProbabilitySet(String),

    #[error("renormalized correlation undefined: all four coincidence entries are zero")]
    UndefinedDenominator,

    #[error("outcome probabilities do not sum to one (deficit {deficit:.3e})")]
    NormalizationViolated { deficit: f64 },

    #[error("visibility {visibility} <= sqrt(2)/2: no efficiency can produce a violation")]
    NoViolationPossible { visibility: f64 },

    #[error("insufficient angular coverage: {0}")]
    InsufficientCoverage(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),

    #[error("line {line}: {message}")]
    Dataset { line: u64, message: String },

    #[error("unknown report format `{0}` (expected json or text)")]
    UnknownFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Config(#[from] toml::de::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Lp(_))
    }
}
