use std::path::PathBuf;

use dynspan::adversary::AdversaryError;
use dynspan::graph::{Distance, ParseError};
use dynspan::job_machine::JmError;
use dynspan::{EdgeKey, SpannerError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error("{path}: {source}")]
    StreamParse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("adversary: {0}")]
    Adversary(#[from] AdversaryError),
    #[error("algorithm: {0}")]
    Spanner(#[from] SpannerError),
    #[error("job machine: {0}")]
    Jm(#[from] JmError),
    #[error("writing metrics: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing metadata: {0}")]
    Json(#[from] serde_json::Error),
    #[error("check failed at step {step}: edge {edge} has spanner distance {dist} > {stretch}")]
    CheckFailed {
        step: u64,
        edge: EdgeKey,
        dist: Distance,
        stretch: usize,
    },
    #[error("check failed at step {step}: {reason}")]
    InvariantFailed { step: u64, reason: String },
}

impl CliError {
    /// 2 for a failed check, 3 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed { .. } | CliError::InvariantFailed { .. } => 2,
            _ => 3,
        }
    }
}
