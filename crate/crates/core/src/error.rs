use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported arity: expected {expected} experts, got {got}")]
    UnsupportedArity { expected: usize, got: usize },

    #[error("protocol violation at step {step}: {detail}")]
    Protocol { step: usize, detail: String },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("run with seed {seed} failed: {source}")]
    Run { seed: u64, source: Box<Error> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
