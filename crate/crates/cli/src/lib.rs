//! Library half of the `latspec` binary, shared with its tests.

pub mod commands;
pub mod config;

pub use commands::{exit_code, Outcome, Overrides};
pub use config::RunConfig;
