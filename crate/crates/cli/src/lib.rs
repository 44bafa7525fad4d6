//! Experiment runner for fixed-depth compilation: configuration, the
//! staged pipeline, run records, tables and plots.

pub mod benchmark;
pub mod cli;
pub mod config;
pub mod failure;
pub mod pipeline;
pub mod plot;
pub mod record;
pub mod run;
pub mod scaling;
pub mod trace;
pub mod verify;

pub use config::{Format, RunConfig};
pub use failure::{FailureKind, Stage, StageError};
pub use record::RunRecord;
