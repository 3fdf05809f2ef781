//! Command-line front end, file formats and thread-parallel sweeps for
//! [`zerostab_core`].

pub mod cli;
pub mod commands;
pub mod format;
pub mod parallel;
pub mod parse;

use std::io;

/// Failure of one CLI invocation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] zerostab_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// `(error, kind)` tags of the JSON error object.
    pub fn tags(&self) -> (&'static str, &'static str) {
        match self {
            CliError::Domain(e) => ("domain", e.kind()),
            CliError::Io { .. } => ("io", "io"),
            CliError::Input(_) => ("input", "input"),
            CliError::Usage(_) => ("usage", "usage"),
        }
    }
}
