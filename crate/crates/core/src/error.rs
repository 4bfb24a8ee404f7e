use thiserror::Error;

/// Errors produced by graph construction, the diffusion operators and the
/// analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("node index {index} out of range for graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected} rows, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense oracle refused: {n} nodes exceeds the oracle cap of {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("negative eigenvalue {0} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
