//! Command-line front end: argument parsing, run configuration and emitters.

pub mod args;
pub mod commands;
pub mod config;
pub mod render;

pub use args::Cli;
pub use commands::{run, Outcome};
pub use config::RunConfig;
