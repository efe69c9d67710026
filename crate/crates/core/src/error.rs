use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no free brick cell available")]
    NoFreeCell,
    #[error("every output is masked; nothing to select")]
    AllMasked,
    #[error("input vector has {got} values, network expects {expected}")]
    InputSize { expected: usize, got: usize },
    #[error("series have zero variance")]
    ZeroVariance,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
