//! Dynamic graph spanners with low recourse and bounded update work.
//!
//! The crate contains a decremental greedy spanner and its fully dynamic
//! extension, a deterministic and a randomized 3-spanner, the job-machine
//! resampling engine behind the randomized one, adversarial update
//! generators, correctness oracles and operation accounting.

pub mod adversary;
pub mod buckets;
pub mod det3;
pub mod error;
pub mod fully_dynamic;
pub mod graph;
pub mod greedy;
pub mod instrumentation;
pub mod job_machine;
pub mod oracle;
pub mod resample3;
pub mod spanner;
pub mod wrapper;

pub use error::SpannerError;
pub use graph::{DynamicGraph, EdgeKey, GraphError, ParseError, UpdateEvent, UpdateKind, VertexId};
