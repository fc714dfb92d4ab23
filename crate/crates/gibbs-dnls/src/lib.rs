//! Experiment runner, file formats and command-line front end for
//! `gibbs-dnls-core`.
//!
//! A run reads a JSON [`config::ExperimentConfig`], evaluates it with
//! [`runner::run`] on any [`gibbs_dnls_core::Executor`] (usually
//! [`parallel::Parallel`]) and writes the [`record::RunRecord`] with
//! [`record::emit`]. Results depend only on the configuration, never on the
//! thread count.

pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod record;
pub mod runner;

pub use config::{parse_config, Experiment, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use parallel::Parallel;
pub use record::{emit, RunRecord, Verdict};
pub use runner::run;
