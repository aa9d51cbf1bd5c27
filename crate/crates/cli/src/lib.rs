//! Configuration, suites and subcommands behind the `teichlab` binary.

pub mod commands;
pub mod config;
pub mod suite;

pub use config::RunConfig;
