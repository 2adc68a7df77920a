//! Configuration, file formats and run orchestration for `chfree_core`.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use config::{ExperimentConfig, Pipeline};
pub use error::{ConfigError, IoError, RunError};
pub use pipeline::{execute, load_config, verify, CheckOutcome, Problem, RunSummary};
