//! Experiment harness for the rank-one solvers: threshold sweeps for the
//! planners, fixed-budget sweeps for the learners, quantile summaries and
//! CSV output.

pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod stats;
pub mod suite;

pub use config::{BenchConfig, EnvSpec, Thresholds};
pub use error::{BenchError, Result};
pub use output::{write_csv, ResultRow, CSV_HEADER};
pub use stats::{aggregate_quantiles, quantile, QuantileRow, Quartiles};
pub use suite::{run_learning_suite, run_planning_suite, LearnReport, PlanReport};
