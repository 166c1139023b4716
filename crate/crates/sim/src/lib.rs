//! Configuration, file formats and experiment drivers for the `enskog`
//! particle simulator.

pub mod commands;
pub mod config;
mod error;
pub mod formats;

pub use config::{parse_config, parse_config_with_env, RunConfig};
pub use error::{ConfigError, Error, Result};
