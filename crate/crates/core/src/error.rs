use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    InvalidTarget { index: usize, n: usize },

    #[error("two-qubit gate needs distinct targets, got {0} twice")]
    RepeatedTarget(usize),

    #[error("cannot parse Pauli string {0:?}")]
    ParsePauli(String),

    #[error("circuit line {line}: {message}")]
    ParseCircuit { line: usize, message: String },

    #[error("Pauli operator is not Hermitian")]
    NonHermitian,

    #[error("Z-type Pauli has no off-diagonal inverse weight")]
    ZType,

    #[error("channel coefficient {value:e} for class (n1={n1}, n2={n2}, n3={n3}) is below the inversion threshold")]
    SigmaTooSmall {
        n1: usize,
        n2: usize,
        n3: usize,
        value: f64,
    },

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("expected a {expected} snapshot")]
    WrongSnapshotKind { expected: &'static str },

    #[error("dataset has no {0} snapshots but the observable needs them")]
    EmptyPart(&'static str),

    #[error("dense oracle cap exceeded: {0}")]
    CapExceeded(String),

    #[error("snapshot store line {line}: {message}")]
    Store { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown verification suite {0:?}")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
