//! Stream replay harness for the dynamic PageRank engines.

pub mod hard_files;
pub mod report;
pub mod runner;
pub mod stream;
pub mod verify;

pub use report::{AggregateReport, Report, Row};
pub use runner::{run_stream, run_trials, EngineKind, RunError, RunParams};
pub use stream::{Record, UpdateStream};
pub use verify::{verify_at_checkpoints, Tolerance, Verdict};
