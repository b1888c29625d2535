use thiserror::Error;

/// Errors reported by construction and numerical routines.
#[derive(Debug, Error)]
pub enum CtqecError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown code name: {0}")]
    UnknownCode(String),

    #[error("invalid stabilizer generators: {0}")]
    InvalidGenerators(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate weights: 3*w0 <= w1 ({w0}, {w1})")]
    DegenerateWeights { w0: f64, w1: f64 },

    #[error("integration unstable at t={t}: {msg}")]
    Unstable { t: f64, msg: String },
}

pub type Result<T> = std::result::Result<T, CtqecError>;
