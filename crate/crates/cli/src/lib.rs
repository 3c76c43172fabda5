//! Command-line driver for the chained polar wiretap simulator.
//!
//! The binary `wbc-polar` exposes five subcommands: `construct`, `encode`,
//! `decode`, `run` and `report`. Experiments are described by an
//! [`config::ExperimentConfig`] in TOML or JSON; its schema is committed
//! under `schema/`.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;

pub use config::ExperimentConfig;
pub use error::CliError;

/// JSON schema of the experiment config file.
pub fn config_schema() -> String {
    let schema = schemars::schema_for!(ExperimentConfig);
    let mut text = serde_json::to_string_pretty(&schema).expect("schema serializes");
    text.push('\n');
    text
}
