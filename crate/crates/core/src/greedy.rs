//! Decremental greedy `(2k-1)`-spanner with optimal recourse.
//!
//! The spanner is kept as the accepted prefix of a greedy inspection order.
//! A spanner edge leaves only when the adversary deletes it; at that point
//! every non-spanner edge is re-inspected in ascending key order and added
//! iff its endpoints are now at distance `>= 2k` in the spanner. The result
//! is exactly what the static greedy would output when it first inspects
//! the surviving spanner edges in their original order.

use std::collections::BTreeSet;

use indexmap::IndexSet;

use crate::error::SpannerError;
use crate::graph::{BfsScratch, Distance, DynamicGraph, EdgeKey};
use crate::instrumentation::{Module, OpCounter, RecourseLog};

#[derive(Debug, Clone)]
pub struct GreedyState {
    k: usize,
    graph: DynamicGraph,
    /// Acceptance order; doubles as the inspection prefix.
    spanner: IndexSet<EdgeKey>,
    spanner_graph: DynamicGraph,
    non_spanner: BTreeSet<EdgeKey>,
    recourse: RecourseLog,
    ops: OpCounter,
    scratch: BfsScratch,
}

impl GreedyState {
    /// Runs the static greedy over `g` in ascending `EdgeKey` order.
    ///
    /// The additions are logged as recourse step 0.
    pub fn build(g: DynamicGraph, k: usize) -> Result<Self, SpannerError> {
        Self::build_from_order(g, k, None)
    }

    fn build_from_order(
        g: DynamicGraph,
        k: usize,
        order: Option<&[EdgeKey]>,
    ) -> Result<Self, SpannerError> {
        if k == 0 {
            return Err(SpannerError::InvalidParameter("k must be at least 1".into()));
        }
        let n = g.n();
        let mut s = Self {
            k,
            spanner: IndexSet::new(),
            spanner_graph: DynamicGraph::empty(n),
            non_spanner: BTreeSet::new(),
            recourse: RecourseLog::new(),
            ops: OpCounter::new(),
            scratch: BfsScratch::new(n),
            graph: DynamicGraph::empty(n),
        };
        let edges: Vec<EdgeKey> = match order {
            Some(o) => o.to_vec(),
            None => g.edges().collect(),
        };
        s.graph = g;
        let mut added = 0;
        for e in edges {
            if s.inspect(e) {
                added += 1;
            } else {
                s.non_spanner.insert(e);
            }
        }
        s.recourse.record(added, 0);
        s.ops.end_step();
        Ok(s)
    }

    /// Adds `e` to the spanner iff its endpoints are `>= 2k` apart in it.
    fn inspect(&mut self, e: EdgeKey) -> bool {
        let cap = 2 * self.k - 1;
        let d = self
            .scratch
            .dist(&self.spanner_graph, e.lo(), e.hi(), cap);
        self.ops.charge(Module::Greedy, self.scratch.last_work() as u64 + 1);
        if d == Distance::Unreachable {
            self.spanner_graph
                .insert_edge(e)
                .expect("inspected edge already in spanner");
            self.spanner.insert(e);
            self.ops.charge(Module::Greedy, 3);
            true
        } else {
            false
        }
    }

    /// Deletes `e` from the graph and repairs the spanner. Returns the
    /// edges that entered the spanner, in acceptance order.
    pub fn handle_delete(&mut self, e: EdgeKey) -> Result<Vec<EdgeKey>, SpannerError> {
        self.graph.delete_edge(e)?;
        self.ops.charge(Module::Graph, 2);
        if self.non_spanner.remove(&e) {
            self.ops.charge(Module::Greedy, 1);
            self.recourse.record(0, 0);
            self.ops.end_step();
            return Ok(Vec::new());
        }
        self.spanner.shift_remove(&e);
        self.spanner_graph
            .delete_edge(e)
            .expect("spanner edge missing from spanner graph");
        self.ops.charge(Module::Greedy, 4);

        let candidates: Vec<EdgeKey> = self.non_spanner.iter().copied().collect();
        let mut added = Vec::new();
        for c in candidates {
            if self.inspect(c) {
                added.push(c);
            }
        }
        for c in &added {
            self.non_spanner.remove(c);
        }
        self.ops.charge(Module::Greedy, added.len() as u64);
        self.recourse.record(added.len() as u64, 1);
        self.ops.end_step();
        Ok(added)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stretch(&self) -> usize {
        2 * self.k - 1
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    /// Spanner edges in acceptance order.
    pub fn spanner_sequence(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.spanner.iter().copied()
    }

    pub fn spanner_set(&self) -> BTreeSet<EdgeKey> {
        self.spanner.iter().copied().collect()
    }

    pub fn spanner_len(&self) -> usize {
        self.spanner.len()
    }

    pub fn contains(&self, e: EdgeKey) -> bool {
        self.spanner.contains(&e)
    }

    pub fn non_spanner(&self) -> &BTreeSet<EdgeKey> {
        &self.non_spanner
    }

    /// Total number of edges ever added to the spanner, including the build.
    pub fn total_recourse(&self) -> u64 {
        self.recourse.total_added()
    }

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    /// Inspection order the static greedy must follow to reproduce the
    /// current spanner: the acceptance sequence, then the rest ascending.
    pub fn equivalent_order(&self) -> Vec<EdgeKey> {
        self.spanner
            .iter()
            .chain(self.non_spanner.iter())
            .copied()
            .collect()
    }

    /// Audits the partition and stretch invariants of the state.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.spanner.len() + self.non_spanner.len() != self.graph.m() {
            return Err("spanner and non-spanner do not partition E".into());
        }
        for e in self.spanner.iter() {
            if self.non_spanner.contains(e) || !self.graph.has_edge(*e) {
                return Err(format!("spanner edge {e} misplaced"));
            }
        }
        let mut scratch = BfsScratch::new(self.graph.n());
        for &e in &self.non_spanner {
            if !self.graph.has_edge(e) {
                return Err(format!("non-spanner edge {e} not in graph"));
            }
            if !scratch
                .dist(&self.spanner_graph, e.lo(), e.hi(), self.stretch())
                .within(self.stretch())
            {
                return Err(format!("non-spanner edge {e} is stretched"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::reference_greedy;

    fn e(u: usize, v: usize) -> EdgeKey {
        EdgeKey::of(u, v)
    }

    fn k3() -> DynamicGraph {
        DynamicGraph::new(3, [e(0, 1), e(0, 2), e(1, 2)]).unwrap()
    }

    #[test]
    fn empty_graph() {
        let s = GreedyState::build(DynamicGraph::empty(4), 2).unwrap();
        assert_eq!(s.spanner_len(), 0);
        assert_eq!(s.total_recourse(), 0);
    }

    #[test]
    fn rejects_k_zero() {
        assert!(GreedyState::build(k3(), 0).is_err());
    }

    #[test]
    fn triangle_build_and_repair() {
        let mut s = GreedyState::build(k3(), 2).unwrap();
        assert_eq!(s.spanner_set(), [e(0, 1), e(0, 2)].into());
        let order = s.equivalent_order();
        assert_eq!(
            reference_greedy(s.graph(), 2, &order).unwrap(),
            s.spanner_sequence().collect::<Vec<_>>()
        );

        // Deleting a spanner edge leaves (1,2) with no path: it is added.
        assert_eq!(s.handle_delete(e(0, 1)).unwrap(), vec![e(1, 2)]);
        assert_eq!(s.spanner_set(), [e(0, 2), e(1, 2)].into());
        assert_eq!(s.total_recourse(), 3);
    }

    #[test]
    fn triangle_with_given_order() {
        // Order [(0,1),(1,2),(0,2)] keeps {(0,1),(1,2)}; deleting (0,1)
        // re-inspects (0,2), which is now unreachable and therefore added.
        let g = k3();
        let mut s = GreedyState::build_from_order(g, 2, Some(&[e(0, 1), e(1, 2), e(0, 2)])).unwrap();
        assert_eq!(s.spanner_set(), [e(0, 1), e(1, 2)].into());
        assert_eq!(s.handle_delete(e(0, 1)).unwrap(), vec![e(0, 2)]);
    }

    #[test]
    fn non_spanner_deletion_is_free() {
        let mut s = GreedyState::build(k3(), 2).unwrap();
        let before = s.total_recourse();
        assert_eq!(s.handle_delete(e(1, 2)).unwrap(), vec![]);
        assert_eq!(s.total_recourse(), before);
        assert_eq!(s.recourse().last().unwrap().added, 0);
    }

    #[test]
    fn missing_edge() {
        let mut s = GreedyState::build(k3(), 2).unwrap();
        s.handle_delete(e(1, 2)).unwrap();
        assert!(matches!(
            s.handle_delete(e(1, 2)),
            Err(SpannerError::Graph(crate::graph::GraphError::EdgeMissing(_)))
        ));
    }

    #[test]
    fn k1_keeps_everything() {
        let s = GreedyState::build(k3(), 1).unwrap();
        assert_eq!(s.spanner_len(), 3);
    }
}
