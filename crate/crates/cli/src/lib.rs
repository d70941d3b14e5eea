//! Configuration-driven front end: parses a TOML run description, runs one
//! analysis and writes CSV/JSON artifacts.

pub mod config;
pub mod run;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use run::{execute, Outcome, RunError};
