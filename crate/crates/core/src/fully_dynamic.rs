//! Fully dynamic `(2k-1)`-spanner from the decremental greedy.
//!
//! Edges are split into levels `E_0 .. E_j` driven by a binary counter of
//! insertions. `E_0` is small enough to be passed through verbatim; every
//! other level is a decremental instance that only sees deletions until the
//! counter tells us to merge lower levels into it and rebuild. The output is
//! the union of the per-level spanners.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;

use crate::error::SpannerError;
use crate::graph::{DynamicGraph, EdgeKey, GraphError};
use crate::greedy::GreedyState;
use crate::instrumentation::{Module, OpCounter, RecourseLog};

/// Greatest `l` with `2^l <= n^{1+1/k}`, i.e. `2^{l k} <= n^{k+1}`.
pub fn base_level(n: usize, k: usize) -> u32 {
    let rhs = BigUint::from(n).pow((k + 1) as u32);
    let mut l = 0u32;
    while BigUint::from(1u8) << ((l as usize + 1) * k) <= rhs {
        l += 1;
    }
    l
}

/// `ceil(log2 n^{1-1/k})`: least `j` with `2^{j k} >= n^{k-1}`.
pub fn top_level(n: usize, k: usize) -> usize {
    let rhs = BigUint::from(n).pow((k - 1) as u32);
    let mut j = 0usize;
    while (BigUint::from(1u8) << (j * k)) < rhs {
        j += 1;
    }
    j
}

/// What an insertion did to the level structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RebuildInfo {
    /// Level that was merged and rebuilt, or `None` if the edge joined `E_0`.
    pub level: Option<usize>,
    /// Number of edges in the rebuilt level.
    pub size: usize,
    pub added: Vec<EdgeKey>,
    pub removed: Vec<EdgeKey>,
}

#[derive(Debug, Clone)]
pub struct FullyDynamicGreedy {
    k: usize,
    ell0: u32,
    top: usize,
    counter: u64,
    graph: DynamicGraph,
    level0: BTreeSet<EdgeKey>,
    /// `levels[i]` for `i >= 1`; index 0 is unused.
    levels: Vec<Option<GreedyState>>,
    owner: HashMap<EdgeKey, usize>,
    recourse: RecourseLog,
    ops: OpCounter,
}

impl FullyDynamicGreedy {
    pub fn new(n: usize, k: usize) -> Result<Self, SpannerError> {
        if k == 0 {
            return Err(SpannerError::InvalidParameter("k must be at least 1".into()));
        }
        let top = top_level(n, k);
        Ok(Self {
            k,
            ell0: base_level(n, k),
            top,
            counter: 0,
            graph: DynamicGraph::empty(n),
            level0: BTreeSet::new(),
            levels: vec![None; top + 1],
            owner: HashMap::new(),
            recourse: RecourseLog::new(),
            ops: OpCounter::new(),
        })
    }

    pub fn ell0(&self) -> u32 {
        self.ell0
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn counter(&self) -> u64 {
        self.counter
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

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn owner(&self, e: EdgeKey) -> Option<usize> {
        self.owner.get(&e).copied()
    }

    pub fn level_edges(&self, i: usize) -> BTreeSet<EdgeKey> {
        if i == 0 {
            self.level0.clone()
        } else {
            self.levels[i]
                .as_ref()
                .map(|s| s.graph().edges().collect())
                .unwrap_or_default()
        }
    }

    pub fn level(&self, i: usize) -> Option<&GreedyState> {
        self.levels.get(i).and_then(Option::as_ref)
    }

    pub fn fd_insert(&mut self, e: EdgeKey) -> Result<RebuildInfo, SpannerError> {
        self.graph.insert_edge(e)?;
        self.ops.charge(Module::Graph, 2);
        let next = self.counter.checked_add(1).ok_or(SpannerError::CounterOverflow)?;
        let flipped_high = next.trailing_zeros();
        self.counter = next;

        let h = if flipped_high <= self.ell0 {
            0
        } else {
            ((flipped_high - self.ell0) as usize).min(self.top)
        };
        let info = if h == 0 {
            self.level0.insert(e);
            self.owner.insert(e, 0);
            self.ops.charge(Module::FullyDynamic, 2);
            RebuildInfo {
                level: None,
                size: self.level0.len(),
                added: vec![e],
                removed: vec![],
            }
        } else {
            self.rebuild(h, e)
        };
        self.recourse
            .record(info.added.len() as u64, info.removed.len() as u64);
        self.ops.end_step();
        Ok(info)
    }

    fn rebuild(&mut self, h: usize, e: EdgeKey) -> RebuildInfo {
        let mut merged: BTreeSet<EdgeKey> = std::mem::take(&mut self.level0);
        let mut old_output: BTreeSet<EdgeKey> = merged.clone();
        for slot in &mut self.levels[1..=h] {
            if let Some(state) = slot.take() {
                merged.extend(state.graph().edges());
                old_output.extend(state.spanner_sequence());
            }
        }
        merged.insert(e);
        for &x in &merged {
            self.owner.insert(x, h);
        }
        let sub = DynamicGraph::new(self.graph.n(), merged.iter().copied())
            .expect("levels partition the edge set");
        let state = GreedyState::build(sub, self.k).expect("k validated at construction");
        self.ops.charge(Module::FullyDynamic, 2 * merged.len() as u64);
        self.ops.charge(Module::Greedy, state.ops().total());

        let new_output = state.spanner_set();
        let added = new_output.difference(&old_output).copied().collect();
        let removed = old_output.difference(&new_output).copied().collect();
        let size = merged.len();
        self.levels[h] = Some(state);
        RebuildInfo {
            level: Some(h),
            size,
            added,
            removed,
        }
    }

    /// Deletes `e` and returns the spanner edges added by the repair.
    pub fn fd_delete(&mut self, e: EdgeKey) -> Result<Vec<EdgeKey>, SpannerError> {
        let level = *self
            .owner
            .get(&e)
            .ok_or(GraphError::EdgeMissing(e))?;
        self.graph.delete_edge(e)?;
        self.owner.remove(&e);
        self.ops.charge(Module::Graph, 2);
        self.ops.charge(Module::FullyDynamic, 1);
        let added = if level == 0 {
            self.level0.remove(&e);
            self.recourse.record(0, 1);
            Vec::new()
        } else {
            let state = self.levels[level]
                .as_mut()
                .expect("owner points at a live level");
            let was_spanner = state.contains(e);
            let before = state.ops().total();
            let added = state.handle_delete(e)?;
            self.ops.charge(Module::Greedy, state.ops().total() - before);
            self.recourse
                .record(added.len() as u64, u64::from(was_spanner));
            added
        };
        self.ops.end_step();
        Ok(added)
    }

    /// Union of the per-level spanners, ascending.
    pub fn fd_spanner(&self) -> BTreeSet<EdgeKey> {
        let mut out = self.level0.clone();
        for s in self.levels.iter().flatten() {
            out.extend(s.spanner_sequence());
        }
        out
    }

    pub fn spanner_len(&self) -> usize {
        self.level0.len()
            + self
                .levels
                .iter()
                .flatten()
                .map(GreedyState::spanner_len)
                .sum::<usize>()
    }

    pub fn contains(&self, e: EdgeKey) -> bool {
        match self.owner.get(&e) {
            Some(0) => true,
            Some(&i) => self.levels[i].as_ref().is_some_and(|s| s.contains(e)),
            None => false,
        }
    }

    /// Capacity bound of level `i`. `E_0` receives every insertion whose
    /// highest flipped bit is at most `l0`, so it can hold up to
    /// `2^{l0+1} - 1` edges before the merge into `E_1`.
    pub fn capacity(&self, i: usize) -> u128 {
        if i == 0 {
            (1u128 << (self.ell0 + 1)) - 1
        } else {
            1u128 << (self.ell0 as usize + i)
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let mut total = 0usize;
        for i in 0..=self.top {
            let edges = self.level_edges(i);
            if edges.len() as u128 > self.capacity(i) {
                return Err(format!("level {i} holds {} edges", edges.len()));
            }
            for e in &edges {
                if self.owner.get(e) != Some(&i) {
                    return Err(format!("owner of {e} is not level {i}"));
                }
                if !self.graph.has_edge(*e) {
                    return Err(format!("level {i} holds deleted edge {e}"));
                }
            }
            total += edges.len();
            if i > 0 {
                if let Some(s) = &self.levels[i] {
                    s.check_invariants()?;
                }
            }
        }
        if total != self.graph.m() || self.owner.len() != self.graph.m() {
            return Err("levels do not partition the edge set".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(u: usize, v: usize) -> EdgeKey {
        EdgeKey::of(u, v)
    }

    #[test]
    fn level_parameters() {
        // 16^{3/2} = 64 = 2^6 and 16^{1/2} = 4 = 2^2.
        assert_eq!(base_level(16, 2), 6);
        assert_eq!(top_level(16, 2), 2);
        // 32^{3/2} = 181.02..., so l0 = 7; 32^{1/2} = 5.65..., so j = 3.
        assert_eq!(base_level(32, 2), 7);
        assert_eq!(top_level(32, 2), 3);
        // 10^{4/3} = 21.5..., l0 = 4; 10^{2/3} = 4.64..., j = 3.
        assert_eq!(base_level(10, 3), 4);
        assert_eq!(top_level(10, 3), 3);
        assert_eq!(top_level(10, 1), 0);
    }

    #[test]
    fn capacity_covers_complete_graph() {
        for n in [2usize, 5, 16, 32, 100] {
            for k in 1..=4 {
                let fd = FullyDynamicGreedy::new(n, k).unwrap();
                let max_edges = (n * (n - 1) / 2) as u128;
                assert!(fd.capacity(fd.top()).max(fd.capacity(0)) >= max_edges, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn first_insertion_goes_to_level_zero() {
        let mut fd = FullyDynamicGreedy::new(16, 2).unwrap();
        let info = fd.fd_insert(e(0, 1)).unwrap();
        assert_eq!(info.level, None);
        assert_eq!(fd.owner(e(0, 1)), Some(0));
        assert_eq!(fd.fd_spanner(), [e(0, 1)].into());
    }

    #[test]
    fn merge_at_bit_l0_plus_one() {
        // Counter reaches 2^{l0+1} = 128 after 128 insertions; we keep the
        // graph small by deleting what we insert (except the last 10).
        let mut fd = FullyDynamicGreedy::new(16, 2).unwrap();
        let pairs: Vec<EdgeKey> = (0..16)
            .flat_map(|u| (u + 1..16).map(move |v| e(u, v)))
            .collect();
        for i in 0..127 {
            let x = pairs[i % pairs.len()];
            assert_eq!(fd.fd_insert(x).unwrap().level, None);
            if i < 117 {
                fd.fd_delete(x).unwrap();
            }
        }
        assert_eq!(fd.level_edges(0).len(), 10);
        let last = pairs[127 % pairs.len()];
        let info = fd.fd_insert(last).unwrap();
        assert_eq!(info.level, Some(1));
        assert_eq!(info.size, 11);
        assert!(fd.level_edges(0).is_empty());
        assert_eq!(fd.level_edges(1).len(), 11);
        fd.check_invariants().unwrap();
    }

    #[test]
    fn duplicate_and_missing() {
        let mut fd = FullyDynamicGreedy::new(8, 2).unwrap();
        fd.fd_insert(e(1, 2)).unwrap();
        assert_eq!(
            fd.fd_insert(e(1, 2)),
            Err(SpannerError::Graph(GraphError::EdgeExists(e(1, 2))))
        );
        assert_eq!(
            fd.fd_delete(e(3, 4)),
            Err(SpannerError::Graph(GraphError::EdgeMissing(e(3, 4))))
        );
    }

    #[test]
    fn level_zero_delete_shrinks_output() {
        let mut fd = FullyDynamicGreedy::new(8, 2).unwrap();
        fd.fd_insert(e(1, 2)).unwrap();
        fd.fd_insert(e(2, 3)).unwrap();
        assert_eq!(fd.fd_delete(e(1, 2)).unwrap(), vec![]);
        assert_eq!(fd.fd_spanner(), [e(2, 3)].into());
    }

    #[test]
    fn empty_history() {
        let fd = FullyDynamicGreedy::new(8, 2).unwrap();
        assert!(fd.fd_spanner().is_empty());
        fd.check_invariants().unwrap();
    }
}
