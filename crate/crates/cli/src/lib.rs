//! The `frobtrace` command line: argument and config parsing, run manifests, and
//! the five subcommands.
//!
//! Exit codes: 0 success, 1 failed verification or runtime error, 2 usage error,
//! 3 size guard, 4 infeasible parameter schedule.

pub mod args;
pub mod combine;
pub mod manifest;
pub mod run;

use std::ffi::OsString;

pub use args::{parse_invocation, Command, Invocation};
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] frobtrace::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Clap(e) => e.exit_code(),
            CliError::Core(frobtrace::Error::SizeGuard { .. }) => 3,
            CliError::Core(frobtrace::Error::ScheduleInfeasible { .. }) => 4,
            _ => 1,
        }
    }
}

/// Runs one invocation and returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let result = parse_invocation(argv).and_then(|inv| run::execute(&inv));
    match result {
        Ok(code) => code,
        Err(CliError::Clap(e)) => {
            // Help and version requests also arrive here, with exit code 0.
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
