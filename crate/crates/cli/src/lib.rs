//! Configuration, task runner and report emission for the `beckner` command-line tool.

pub mod config;
pub mod emit;
pub mod error;
pub mod fixtures;
pub mod report;
pub mod tasks;
pub mod verify;

pub use config::{ExperimentConfig, Task};
pub use error::{ConfigError, EmitError};
pub use report::{Check, RunReport};
pub use tasks::run;
