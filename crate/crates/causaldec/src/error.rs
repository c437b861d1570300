use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown fixture descriptor: {0}")]
    UnknownDescriptor(String),
    #[error("{descriptor}: {reason}")]
    TooSmall { descriptor: String, reason: String },
    #[error("invalid time axis: {0}")]
    TimeAxis(String),
    #[error("degree {degree} outside 0..={max}")]
    Degree { degree: usize, max: usize },
    #[error("operation needs {0}")]
    Precondition(String),
    #[error("cochains live on different complexes ({0:016x} vs {1:016x})")]
    ComplexMismatch(u64, u64),
    #[error("support violation: {0}")]
    Support(String),
    #[error("pairing not well defined: {0}")]
    Pairing(String),
    #[error("chain map check failed: {0}")]
    ChainMap(String),
    #[error("image not contained in kernel: {0}")]
    Inclusion(String),
    #[error("not a cocycle of the class: {0}")]
    NotCocycle(String),
    #[error("singular leading block: {0}")]
    SingularBlock(String),
    #[error("invalid bump: {0}")]
    Bump(String),
    #[error("off-shell input: {0}")]
    OffShell(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
