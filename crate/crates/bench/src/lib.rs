//! Benchmark harness for the two-to-infinity norm estimators: seeded trial
//! ensembles over a matrix, matvec accounting, CSV output and summaries.

pub mod config;
pub mod csv;
pub mod error;
pub mod runner;
pub mod summary;

pub use config::{BenchConfig, ConfigLayer, MatrixSource, SourceSpec};
pub use error::{BenchError, Result};
pub use runner::{load_matrix, run_bench, run_on_matrix, BenchOutput, BenchRecord, SkippedCell};
pub use summary::{summarize, SummaryRow};
