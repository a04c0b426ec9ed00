//! Command-line front end and HTTP service for the inventory routing solver.

pub mod cli;
pub mod service;

pub use cli::{run, Cli, CliError, Command};
