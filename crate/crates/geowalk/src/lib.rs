//! Command-line front end for `geowalk-core`: TOML run configs, descriptor
//! strings for manifolds/bodies/targets, a rayon-backed executor, and the
//! JSONL/CSV writers behind the `sample`, `anneal` and `diagnose` modes.

pub mod builtins;
pub mod config;
pub mod pool;
pub mod run;
pub mod suite;

pub use config::{Mode, RunConfig};
pub use pool::Pool;
pub use run::{execute, Summary};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad config file or descriptor string; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Failure while running; exit code 1.
    #[error("{0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}
