//! Library side of the `bttb-precond` command-line tool.

pub mod args;
pub mod experiment;
pub mod report;

pub use experiment::{
    prepare, run_experiment, ExperimentConfig, Mode, PreparedProblem, ProblemKind, RunImages,
    RunRecord, THREADS_ENV,
};
pub use report::{summarize, write_outputs, SummaryRow, CSV_HEADER};
