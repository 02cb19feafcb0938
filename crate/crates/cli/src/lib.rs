//! The `resttsl` pipeline: configuration, run directories, stage execution
//! and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod layout;
pub mod pipeline;

pub use commands::{execute, Args, Command};
pub use config::{Mode, PipelineConfig, Project};
pub use error::CliError;
pub use layout::RunDir;
pub use pipeline::{Options, Orchestrator, StageOutcome};
