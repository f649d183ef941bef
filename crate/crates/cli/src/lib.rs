//! Batch front-end: configs, presets, subcommands and result files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use config::{Flags, RunConfig, Scale};
pub use error::CliError;
pub use presets::Preset;
