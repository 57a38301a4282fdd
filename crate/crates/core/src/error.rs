//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch in {matrix}: {detail}")]
    Dimension { matrix: String, detail: String },

    #[error("invalid network: {0}")]
    Invalid(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error(
        "Jordan structure at eigenvalue {eigenvalue} cannot be resolved under the rank tolerance \
         (singular values {singular_values:?})"
    )]
    ChainAmbiguity {
        eigenvalue: num_complex::Complex64,
        singular_values: Vec<f64>,
    },

    #[error("structure mismatch: {0}")]
    Structure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
