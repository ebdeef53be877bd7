use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input the kernels cannot represent (machine-width ceilings).
    #[error("range error: {0}")]
    Range(String),

    #[error("{a} is not invertible modulo {modulus} (gcd = {gcd})")]
    NotInvertible { a: i128, modulus: u64, gcd: u64 },

    /// A theorem-backed assertion failed. Seeing this means a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("checkpoint fingerprint mismatch: file has {found:016x}, task has {expected:016x}")]
    FingerprintMismatch { expected: u64, found: u64 },

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("lerch methods disagree at p = {p}: definition = {definition}, test = {test}")]
    VerdictMismatch {
        p: u64,
        definition: bool,
        test: bool,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
