use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("matrix is not real: imaginary residue {residue:.3e} exceeds {bound:.3e}")]
    NotReal { residue: f64, bound: f64 },
    #[error("dimension {d} exceeds the dense oracle cap {cap}")]
    OverCap { d: usize, cap: usize },
    #[error("query budget of {0} entries exhausted")]
    BudgetExhausted(usize),
    #[error("filter construction failed: {0}")]
    Filter(String),
    #[error("hash parameter range is empty: {0}")]
    HashRange(String),
    #[error("signal empty at probes")]
    EmptySignal,
    #[error("no consensus among votes")]
    NoConsensus,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
