use std::path::PathBuf;

use thiserror::Error;
use twoinf::Method;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] twoinf::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(
        "matvec accounting mismatch for {method} at budget {budget}, trial {trial}: \
         cost model says {expected}, oracle counted {counted}"
    )]
    Accounting {
        method: Method,
        budget: u64,
        trial: usize,
        expected: u64,
        counted: u64,
    },

    #[error("worker pool: {0}")]
    Pool(String),

    #[error("cannot summarize an empty record set")]
    NoRecords,
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

impl BenchError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }
}
