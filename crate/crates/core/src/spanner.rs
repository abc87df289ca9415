//! Common interface over the dynamic spanner algorithms.

use std::collections::BTreeSet;

use crate::error::SpannerError;
use crate::fully_dynamic::FullyDynamicGreedy;
use crate::graph::{DynamicGraph, EdgeKey, UpdateEvent, UpdateKind, VertexId};
use crate::greedy::GreedyState;

/// Net change of the spanner caused by one update.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpannerDelta {
    pub added: Vec<EdgeKey>,
    pub removed: Vec<EdgeKey>,
}

impl SpannerDelta {
    pub fn changes(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

/// What an adaptive adversary is allowed to look at.
pub trait SpannerView {
    fn graph(&self) -> &DynamicGraph;

    /// Current spanner edges, ascending.
    fn spanner_edges(&self) -> Vec<EdgeKey>;

    /// Number of witness paths routed through each loaded edge, if the
    /// algorithm has such a notion.
    fn edge_loads(&self) -> Option<Vec<(EdgeKey, u64)>> {
        None
    }

    /// Chosen witness of every same-bucket pair `(u, u')`, if the algorithm
    /// samples witnesses.
    fn witnesses(&self) -> Option<Vec<((VertexId, VertexId), VertexId)>> {
        None
    }

    /// Most loaded edge, smallest key on ties.
    fn max_load_edge(&self) -> Option<(EdgeKey, u64)> {
        self.edge_loads()?
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
    }
}

pub trait DynamicSpanner: SpannerView {
    fn name(&self) -> &'static str;

    fn stretch(&self) -> usize;

    fn insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError>;

    fn delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError>;

    fn apply(&mut self, ev: &UpdateEvent) -> Result<SpannerDelta, SpannerError> {
        match ev.kind {
            UpdateKind::Insert => self.insert(ev.edge),
            UpdateKind::Delete => self.delete(ev.edge),
        }
    }

    fn spanner_len(&self) -> usize;

    /// Elementary operations charged to the last update.
    fn last_ops(&self) -> u64;

    /// Resample calls made by the last update.
    fn last_resamples(&self) -> u64 {
        0
    }
}

impl SpannerView for GreedyState {
    fn graph(&self) -> &DynamicGraph {
        GreedyState::graph(self)
    }

    fn spanner_edges(&self) -> Vec<EdgeKey> {
        self.spanner_set().into_iter().collect()
    }
}

impl DynamicSpanner for GreedyState {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn stretch(&self) -> usize {
        GreedyState::stretch(self)
    }

    fn insert(&mut self, _e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        Err(SpannerError::Unsupported {
            algo: "greedy",
            what: "insertions",
        })
    }

    fn delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        let was = self.contains(e);
        let added = self.handle_delete(e)?;
        Ok(SpannerDelta {
            added,
            removed: if was { vec![e] } else { vec![] },
        })
    }

    fn spanner_len(&self) -> usize {
        GreedyState::spanner_len(self)
    }

    fn last_ops(&self) -> u64 {
        self.ops().last_step()
    }
}

impl SpannerView for FullyDynamicGreedy {
    fn graph(&self) -> &DynamicGraph {
        FullyDynamicGreedy::graph(self)
    }

    fn spanner_edges(&self) -> Vec<EdgeKey> {
        self.fd_spanner().into_iter().collect()
    }
}

impl DynamicSpanner for FullyDynamicGreedy {
    fn name(&self) -> &'static str {
        "fd-greedy"
    }

    fn stretch(&self) -> usize {
        FullyDynamicGreedy::stretch(self)
    }

    fn insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        let info = self.fd_insert(e)?;
        Ok(SpannerDelta {
            added: info.added,
            removed: info.removed,
        })
    }

    fn delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        let was = self.contains(e);
        let added = self.fd_delete(e)?;
        Ok(SpannerDelta {
            added,
            removed: if was { vec![e] } else { vec![] },
        })
    }

    fn spanner_len(&self) -> usize {
        FullyDynamicGreedy::spanner_len(self)
    }

    fn last_ops(&self) -> u64 {
        self.ops().last_step()
    }
}

/// Net difference between two spanner snapshots.
pub fn diff(before: &BTreeSet<EdgeKey>, after: &BTreeSet<EdgeKey>) -> SpannerDelta {
    SpannerDelta {
        added: after.difference(before).copied().collect(),
        removed: before.difference(after).copied().collect(),
    }
}
