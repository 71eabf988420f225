//! Scenario files, reports, mesh export and the command line around
//! [`morphoplate_core`].

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod json;
pub mod mesh;
pub mod report;

pub use commands::{run, Command, Outcome, Overrides, Status};
pub use config::Scenario;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MORPHOPLATE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] morphoplate_core::Error),
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

/// Worker pool sized by [`THREADS_ENV`] when set, else by rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Threads(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Threads(e.to_string()))
}
