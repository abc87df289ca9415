//! Worst-case update time for the randomized 3-spanner.
//!
//! Instead of rebuilding from scratch every `L` updates, the next phase
//! instance is built in the background while the current one is live. Each
//! phase of `L` updates is split into three windows:
//!
//! * `[0, a)`: build the next instance from the graph frozen at phase start,
//!   and drop the output of the instance retired at phase start;
//! * `[a, b)`: add the next instance's spanner to the output;
//! * `[b, L)`: replay the updates queued since phase start into the next
//!   instance, three per update, so it is caught up by the end of the phase.
//!
//! The output is the union of the contributed edge sets, so the live
//! instance alone keeps it a 3-spanner at every step.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Bound::{Excluded, Unbounded};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::buckets::{ceil_log2, ceil_sqrt, BucketPartition};
use crate::error::SpannerError;
use crate::graph::{DynamicGraph, EdgeKey, GraphError, UpdateEvent, UpdateKind, VertexId};
use crate::instrumentation::{Module, OpCounter, RecourseLog};
use crate::resample3::{Pair, PhaseState};
use crate::spanner::{DynamicSpanner, SpannerDelta, SpannerView};

/// Updates replayed into the next instance per real update.
const REPLAY_RATE: usize = 3;

/// Window boundaries `(a, b)` of a phase of length `l`.
pub fn windows(l: u64) -> (u64, u64) {
    let third = l.div_ceil(3);
    (third, l - third)
}

#[derive(Debug, Clone, Copy)]
struct Quotas {
    build: u64,
    feed: usize,
    retire: usize,
}

#[derive(Debug, Clone, Copy)]
struct WorkBound {
    total: u64,
    unit: u64,
    edges: u64,
}

fn work_bound(buckets: &BucketPartition) -> WorkBound {
    let n = buckets.n() as u64;
    let s = buckets.max_size() as u64;
    let nb = buckets.count() as u64;
    let m_max = n * n.saturating_sub(1) / 2;
    let pairs_max: u64 = (0..buckets.count())
        .map(|i| {
            let k = buckets.members(i).len() as u64;
            k * k.saturating_sub(1) / 2
        })
        .sum();
    let ingest = 2 * s + 5;
    let vertex = 2 * nb + 1;
    let pair = 14;
    WorkBound {
        total: m_max * ingest + n * vertex + pairs_max * pair,
        unit: ingest.max(vertex).max(pair),
        edges: m_max,
    }
}

fn quotas(buckets: &BucketPartition, l: u64) -> Quotas {
    let (a, b) = windows(l);
    let w = work_bound(buckets);
    Quotas {
        build: w.total.div_ceil(a.max(1)),
        feed: w.edges.div_ceil((b - a).max(1)) as usize,
        retire: w.edges.div_ceil(a.max(1)) as usize,
    }
}

/// Background work per update: the build, feed and retire chunks.
pub fn rebuild_chunk(n: usize, l: u64) -> u64 {
    let buckets = BucketPartition::round_robin(n);
    let q = quotas(&buckets, l);
    q.build + work_bound(&buckets).unit + 3 * q.feed as u64 + 3 * q.retire as u64 + 8
}

/// Declared per-update operation budget `C * ceil(sqrt n) * ceil(log2 n)`
/// plus the background chunk.
pub fn planned_budget(n: usize, l: u64, c: u64) -> u64 {
    c * ceil_sqrt(n) as u64 * u64::from(ceil_log2(n).max(1)) + rebuild_chunk(n, l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BuildStage {
    Ingest { u: VertexId, after: Option<VertexId> },
    Vertices { next: VertexId },
    Pairs { after: Option<Pair> },
    Done,
}

/// Randomized 3-spanner with the rebuild spread over the previous phase.
#[derive(Debug, Clone)]
pub struct WrappedResample3 {
    graph: DynamicGraph,
    buckets: BucketPartition,
    phase_len: u64,
    a: u64,
    b: u64,
    quotas: Quotas,
    master: ChaCha8Rng,
    pos: u64,
    phases: u64,
    live: PhaseState,
    live_set: BTreeSet<EdgeKey>,
    next: PhaseState,
    next_set: BTreeSet<EdgeKey>,
    stage: BuildStage,
    feed_cursor: Option<EdgeKey>,
    feed_done: bool,
    retiring: BTreeSet<EdgeKey>,
    /// Graph frozen at phase start; catches up while the queue is replayed.
    mirror: DynamicGraph,
    queue: VecDeque<UpdateEvent>,
    out: BTreeMap<EdgeKey, u8>,
    touched: BTreeMap<EdgeKey, bool>,
    forced: u64,
    seq: u64,
    last_resamples: u64,
    ops: OpCounter,
    recourse: RecourseLog,
}

impl WrappedResample3 {
    pub fn new(g: &DynamicGraph, phase_len: u64, seed: u64) -> Result<Self, SpannerError> {
        Self::with_buckets(g, BucketPartition::round_robin(g.n()), phase_len, seed)
    }

    pub fn with_buckets(
        g: &DynamicGraph,
        buckets: BucketPartition,
        phase_len: u64,
        seed: u64,
    ) -> Result<Self, SpannerError> {
        if phase_len < 3 {
            return Err(SpannerError::InvalidParameter(
                "phase length must be at least 3".into(),
            ));
        }
        let (a, b) = windows(phase_len);
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let live = PhaseState::start(g, buckets.clone(), phase_len, master.gen());
        let next = PhaseState::empty(buckets.clone(), 2 * phase_len, master.gen());
        let live_set = live.spanner();
        let out = live_set.iter().map(|&e| (e, 1)).collect();
        Ok(Self {
            graph: g.clone(),
            quotas: quotas(&buckets, phase_len),
            buckets,
            phase_len,
            a,
            b,
            master,
            pos: 0,
            phases: 1,
            live,
            live_set,
            next,
            next_set: BTreeSet::new(),
            stage: BuildStage::Ingest { u: 0, after: None },
            feed_cursor: None,
            feed_done: false,
            retiring: BTreeSet::new(),
            mirror: g.clone(),
            queue: VecDeque::new(),
            out,
            touched: BTreeMap::new(),
            forced: 0,
            seq: 0,
            last_resamples: 0,
            ops: OpCounter::new(),
            recourse: RecourseLog::new(),
        })
    }

    fn out_add(&mut self, e: EdgeKey) {
        let c = self.out.entry(e).or_insert(0);
        if *c == 0 {
            self.touched.entry(e).or_insert(false);
        }
        *c += 1;
        self.ops.charge(Module::Wrapper, 1);
    }

    fn out_drop(&mut self, e: EdgeKey) {
        let c = self.out.get_mut(&e).expect("dropping an uncontributed edge");
        *c -= 1;
        if *c == 0 {
            self.out.remove(&e);
            self.touched.entry(e).or_insert(true);
        }
        self.ops.charge(Module::Wrapper, 1);
    }

    /// One unit of build work; returns false once the build is complete.
    fn build_unit(&mut self) -> bool {
        self.ops.charge(Module::Wrapper, 1);
        match self.stage {
            BuildStage::Ingest { u, after } => {
                let n = self.mirror.n();
                if u >= n {
                    self.stage = BuildStage::Vertices { next: 0 };
                    return true;
                }
                let lo = after.map_or(u + 1, |v| v + 1).max(u + 1);
                match self.mirror.neighbors(u).range(lo..).next().copied() {
                    Some(v) => {
                        self.next.ingest_edge(EdgeKey::of(u, v));
                        self.stage = BuildStage::Ingest { u, after: Some(v) };
                    }
                    None => self.stage = BuildStage::Ingest { u: u + 1, after: None },
                }
                true
            }
            BuildStage::Vertices { next } => {
                if next >= self.mirror.n() {
                    self.stage = BuildStage::Pairs { after: None };
                } else {
                    self.next.finish_vertex(next);
                    self.stage = BuildStage::Vertices { next: next + 1 };
                }
                true
            }
            BuildStage::Pairs { after } => {
                match self.next.pair_after(after) {
                    Some(p) => {
                        self.next.finish_pair(p);
                        self.stage = BuildStage::Pairs { after: Some(p) };
                    }
                    None => {
                        self.next.seal();
                        self.stage = BuildStage::Done;
                    }
                }
                true
            }
            BuildStage::Done => false,
        }
    }

    fn build_chunk(&mut self, quota: u64) {
        let start = self.ops.pending() + self.next.ops().total();
        while self.ops.pending() + self.next.ops().total() - start < quota {
            if !self.build_unit() {
                break;
            }
        }
    }

    fn feed_chunk(&mut self, quota: usize) {
        let lower = self.feed_cursor.map_or(Unbounded, Excluded);
        let batch: Vec<EdgeKey> = self
            .next
            .output()
            .range((lower, Unbounded))
            .take(quota)
            .map(|(&e, _)| e)
            .collect();
        self.ops.charge(Module::Wrapper, 1 + batch.len() as u64);
        if batch.len() < quota {
            self.feed_done = true;
        }
        if let Some(&last) = batch.last() {
            self.feed_cursor = Some(last);
        }
        for e in batch {
            self.ops.charge(Module::Wrapper, 1);
            if self.graph.has_edge(e) && self.next_set.insert(e) {
                self.out_add(e);
            }
        }
    }

    fn retire_chunk(&mut self, quota: usize) {
        for _ in 0..quota {
            let Some(e) = self.retiring.pop_first() else {
                break;
            };
            self.ops.charge(Module::Wrapper, 1);
            self.out_drop(e);
        }
    }

    fn fed(&self, e: EdgeKey) -> bool {
        self.feed_done || self.feed_cursor.is_some_and(|c| e <= c)
    }

    fn replay_one(&mut self) -> Result<(), SpannerError> {
        let Some(ev) = self.queue.pop_front() else {
            return Ok(());
        };
        self.mirror.apply(&ev)?;
        self.ops.charge(Module::Wrapper, 3);
        let delta = match ev.kind {
            UpdateKind::Insert => self.next.r3_insert(ev.edge)?,
            UpdateKind::Delete => self.next.r3_delete(ev.edge)?,
        };
        for e in delta.added {
            self.ops.charge(Module::Wrapper, 1);
            if self.graph.has_edge(e) && self.fed(e) && self.next_set.insert(e) {
                self.out_add(e);
            }
        }
        for e in delta.removed {
            self.ops.charge(Module::Wrapper, 1);
            if self.next_set.remove(&e) {
                self.out_drop(e);
            }
        }
        Ok(())
    }

    fn background(&mut self, ev: UpdateEvent) -> Result<(), SpannerError> {
        let p = self.pos;
        self.queue.push_back(ev);
        self.ops.charge(Module::Wrapper, 1);
        if p < self.a {
            self.build_chunk(self.quotas.build);
            self.retire_chunk(self.quotas.retire);
            return Ok(());
        }
        if self.stage != BuildStage::Done {
            self.build_chunk(self.quotas.build);
            return Ok(());
        }
        if p < self.b || !self.feed_done {
            self.feed_chunk(self.quotas.feed);
            if p < self.b {
                return Ok(());
            }
        }
        for _ in 0..REPLAY_RATE {
            self.replay_one()?;
        }
        Ok(())
    }

    /// Makes the caught-up next instance live and starts building the one
    /// after it.
    fn switch(&mut self) -> Result<(), SpannerError> {
        if self.stage != BuildStage::Done || !self.feed_done || !self.queue.is_empty() {
            // Not reachable with the window quotas; finish the work anyway
            // rather than hand over an incomplete instance.
            self.forced += 1;
            while self.build_unit() {}
            while !self.feed_done {
                self.feed_chunk(usize::MAX);
            }
            while !self.queue.is_empty() {
                self.replay_one()?;
            }
        }
        let fresh = PhaseState::empty(self.buckets.clone(), 2 * self.phase_len, self.master.gen());
        let old_live = std::mem::replace(&mut self.live, std::mem::replace(&mut self.next, fresh));
        drop(old_live);
        let old_set = std::mem::take(&mut self.live_set);
        self.live_set = std::mem::take(&mut self.next_set);
        if self.retiring.is_empty() {
            self.retiring = old_set;
        } else {
            self.forced += 1;
            self.retiring.extend(old_set);
        }
        self.stage = BuildStage::Ingest { u: 0, after: None };
        self.feed_cursor = None;
        self.feed_done = false;
        self.pos = 0;
        self.phases += 1;
        Ok(())
    }

    fn step(&mut self, kind: UpdateKind, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.graph.check_edge(e)?;
        match kind {
            UpdateKind::Insert if self.graph.has_edge(e) => {
                return Err(GraphError::EdgeExists(e).into())
            }
            UpdateKind::Delete if !self.graph.has_edge(e) => {
                return Err(GraphError::EdgeMissing(e).into())
            }
            _ => {}
        }
        let live_before = self.live.ops().total() + self.next.ops().total();
        let resamples_before = self.live.total_resamples() + self.next.total_resamples();
        let ev = match kind {
            UpdateKind::Insert => UpdateEvent::insert(self.seq, e),
            UpdateKind::Delete => UpdateEvent::delete(self.seq, e),
        };
        self.seq += 1;
        self.graph.apply(&ev)?;
        self.ops.charge(Module::Graph, 2);
        if kind == UpdateKind::Delete {
            if self.live_set.remove(&e) {
                self.out_drop(e);
            }
            if self.next_set.remove(&e) {
                self.out_drop(e);
            }
            if self.retiring.remove(&e) {
                self.out_drop(e);
            }
            self.ops.charge(Module::Wrapper, 3);
        }
        let delta = match kind {
            UpdateKind::Insert => self.live.r3_insert(e)?,
            UpdateKind::Delete => self.live.r3_delete(e)?,
        };
        for a in delta.added {
            self.ops.charge(Module::Wrapper, 1);
            if self.live_set.insert(a) {
                self.out_add(a);
            }
        }
        for r in delta.removed {
            self.ops.charge(Module::Wrapper, 1);
            if self.live_set.remove(&r) {
                self.out_drop(r);
            }
        }
        self.background(ev)?;
        self.pos += 1;
        // Resamples and instance work are read before a switch swaps the
        // instances out.
        let instance_ops = self.live.ops().total() + self.next.ops().total() - live_before;
        self.last_resamples =
            self.live.total_resamples() + self.next.total_resamples() - resamples_before;
        if self.pos == self.phase_len {
            self.switch()?;
        }
        self.ops.charge(Module::Resample3, instance_ops);

        let mut out = SpannerDelta::default();
        for (e, was) in std::mem::take(&mut self.touched) {
            match (was, self.out.contains_key(&e)) {
                (false, true) => out.added.push(e),
                (true, false) => out.removed.push(e),
                _ => {}
            }
        }
        self.recourse
            .record(out.added.len() as u64, out.removed.len() as u64);
        self.ops.end_step();
        Ok(out)
    }

    pub fn live(&self) -> &PhaseState {
        &self.live
    }

    pub fn spanner(&self) -> BTreeSet<EdgeKey> {
        self.out.keys().copied().collect()
    }

    pub fn phase_len(&self) -> u64 {
        self.phase_len
    }

    /// Phase instances made live so far, including the first.
    pub fn phases(&self) -> u64 {
        self.phases
    }

    /// Position within the current phase.
    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Times a phase ended with background work still pending. Stays zero
    /// under the window quotas.
    pub fn forced_catchups(&self) -> u64 {
        self.forced
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }

    /// Checks that the output is the union of the contributed sets, lies in
    /// the graph and contains the live instance's spanner.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut refs: BTreeMap<EdgeKey, u8> = BTreeMap::new();
        for set in [&self.live_set, &self.next_set, &self.retiring] {
            for &e in set {
                if !self.graph.has_edge(e) {
                    return Err(format!("contributed edge {e} is not in the graph"));
                }
                *refs.entry(e).or_default() += 1;
            }
        }
        if refs != self.out {
            return Err("output multiplicities differ from the contributed sets".into());
        }
        if self.live_set != self.live.spanner() {
            return Err("live contribution differs from the live spanner".into());
        }
        if self.live.graph().to_canonical() != self.graph.to_canonical() {
            return Err("live instance is not caught up".into());
        }
        self.live.check_invariants()
    }
}

impl SpannerView for WrappedResample3 {
    fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    fn spanner_edges(&self) -> Vec<EdgeKey> {
        self.out.keys().copied().collect()
    }

    fn edge_loads(&self) -> Option<Vec<(EdgeKey, u64)>> {
        self.live.edge_loads()
    }

    fn witnesses(&self) -> Option<Vec<(Pair, VertexId)>> {
        SpannerView::witnesses(&self.live)
    }

    fn max_load_edge(&self) -> Option<(EdgeKey, u64)> {
        self.live.max_load_edge()
    }
}

impl DynamicSpanner for WrappedResample3 {
    fn name(&self) -> &'static str {
        "resample3-wrapped"
    }

    fn stretch(&self) -> usize {
        3
    }

    fn insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.step(UpdateKind::Insert, e)
    }

    fn delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.step(UpdateKind::Delete, e)
    }

    fn spanner_len(&self) -> usize {
        self.out.len()
    }

    fn last_ops(&self) -> u64 {
        self.ops.last_step()
    }

    fn last_resamples(&self) -> u64 {
        self.last_resamples
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{verify_stretch, CheckMode};
    use crate::resample3::Resample3Spanner;

    #[test]
    fn window_bounds() {
        assert_eq!(windows(9), (3, 6));
        assert_eq!(windows(10), (4, 6));
        assert_eq!(windows(3), (1, 2));
    }

    #[test]
    fn rejects_short_phases() {
        assert!(WrappedResample3::new(&DynamicGraph::empty(4), 2, 0).is_err());
    }

    #[test]
    fn matches_unwrapped_before_feeding() {
        let g = DynamicGraph::from_pairs(9, [(0, 8), (3, 8), (6, 8), (0, 4), (3, 4), (1, 2)]).unwrap();
        let mut w = WrappedResample3::new(&g, 30, 11).unwrap();
        let mut r = Resample3Spanner::new(&g, 30, 11).unwrap();
        let events = [
            (UpdateKind::Insert, EdgeKey::of(5, 7)),
            (UpdateKind::Delete, EdgeKey::of(6, 8)),
            (UpdateKind::Delete, EdgeKey::of(0, 4)),
        ];
        for (kind, e) in events {
            let ev = match kind {
                UpdateKind::Insert => UpdateEvent::insert(0, e),
                UpdateKind::Delete => UpdateEvent::delete(0, e),
            };
            assert_eq!(w.apply(&ev).unwrap(), r.apply(&ev).unwrap());
            assert_eq!(w.spanner_edges(), r.spanner_edges());
        }
        w.check_invariants().unwrap();
    }

    #[test]
    fn rollover_keeps_stretch() {
        let n = 12;
        let mut g = DynamicGraph::empty(n);
        let mut w = WrappedResample3::new(&g, 9, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let u = rng.gen_range(0..n);
            let v = (u + rng.gen_range(1..n)) % n;
            let e = EdgeKey::of(u, v);
            if g.has_edge(e) {
                g.delete_edge(e).unwrap();
                w.delete(e).unwrap();
            } else {
                g.insert_edge(e).unwrap();
                w.insert(e).unwrap();
            }
            w.check_invariants().unwrap();
            let r = verify_stretch(&g, w.spanner_edges(), 3, CheckMode::Exact).unwrap();
            assert!(r.ok);
        }
        assert!(w.phases() > 20);
        assert_eq!(w.forced_catchups(), 0);
    }
}
