//! Experiment harness for the `sparsesplit` engines: stream replay with
//! per-update metrics, parameter sweeps and an invariant checker.

mod experiment;
mod sweep;
mod verify;

use sparsesplit::stream_io::StreamError;

pub use experiment::{
    run_experiment, score_ratio, within_bound, write_rows, Algorithm, Clock, MetricRow, RunConfig,
    RunReport, Source, CSV_COLUMNS,
};
pub use sweep::{sweep, SweepAxis, SweepConfig, SweepRow};
pub use verify::{verify, VerifyConfig, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Engine(#[from] sparsesplit::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Exit status for usage and I/O errors.
pub const EXIT_ERROR: i32 = 1;

/// Exit status when a run breaks the approximation guarantee.
pub const EXIT_VIOLATION: i32 = 2;
