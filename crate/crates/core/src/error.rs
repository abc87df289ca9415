use thiserror::Error;

use crate::graph::GraphError;

/// Errors raised by the spanner maintenance algorithms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpannerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{algo} does not support {what}")]
    Unsupported {
        algo: &'static str,
        what: &'static str,
    },
    #[error("phase exhausted after {0} updates")]
    PhaseExhausted(u64),
    #[error("insertion counter overflow")]
    CounterOverflow,
}
