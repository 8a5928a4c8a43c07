//! Configuration, scan engine and output writers behind the `socwell` CLI.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod scan;

pub use commands::{execute, Command};
pub use config::Config;
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] socwell_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("worker pool: {0}")]
    Pool(String),
}
