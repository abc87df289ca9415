//! Randomized 3-spanner maintained by proactive resampling.
//!
//! The spanner is `E1 ∪ E2 ∪ E3` plus every edge inserted during the current
//! phase. `E1` holds one partner edge per vertex and foreign bucket, `E2`
//! every edge inside a bucket and `E3` the two edges of a witness path
//! `u - w - u'` for every same-bucket pair with a common neighbour. Within a
//! phase the indexed (base) graph only loses edges; insertions are passed
//! through and folded into the index when the next phase starts.
//!
//! Witness pairs play the role of jobs, base edges the role of machines and
//! each common neighbour `w` of a pair the role of a routine using the two
//! machines `(u, w)` and `(u', w)`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::buckets::BucketPartition;
use crate::error::SpannerError;
use crate::graph::{DynamicGraph, EdgeKey, GraphError, VertexId};
use crate::instrumentation::{Module, OpCounter, RecourseLog};
use crate::job_machine::Schedule;
use crate::spanner::{diff, DynamicSpanner, SpannerDelta, SpannerView};

/// Same-bucket vertex pair, smaller vertex first.
pub type Pair = (VertexId, VertexId);

fn pair(a: VertexId, b: VertexId) -> Pair {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// `ceil(n^{3/2})`, the default phase length.
pub fn default_phase_len(n: usize) -> u64 {
    let n = n as u64;
    let mut r = (n as f64).powf(1.5) as u64;
    while r * r < n * n * n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n * n * n {
        r -= 1;
    }
    r
}

/// One phase of the randomized 3-spanner.
#[derive(Debug, Clone)]
pub struct PhaseState {
    buckets: BucketPartition,
    graph: DynamicGraph,
    base: DynamicGraph,
    buffer: BTreeSet<EdgeKey>,
    /// `cross[v][i]` = base neighbours of `v` in bucket `i`.
    cross: Vec<Vec<BTreeSet<VertexId>>>,
    partner: Vec<Vec<Option<VertexId>>>,
    partnership: BTreeMap<Pair, IndexSet<VertexId>>,
    witness: BTreeMap<Pair, VertexId>,
    /// `uses[(x, w)]` = the `x'` whose pair with `x` has witness `w`.
    uses: BTreeMap<(VertexId, VertexId), BTreeSet<VertexId>>,
    edge_load: BTreeMap<EdgeKey, u64>,
    load_index: BTreeSet<(u64, Reverse<EdgeKey>)>,
    schedule: Schedule<Pair>,
    output: BTreeMap<EdgeKey, u32>,
    touched: BTreeMap<EdgeKey, bool>,
    /// Off while the phase is being built, so the build is not reported
    /// as a delta.
    track: bool,
    clock: u64,
    updates: u64,
    horizon: u64,
    rng: ChaCha8Rng,
    resamples: u64,
    last_resamples: u64,
    ops: OpCounter,
    recourse: RecourseLog,
}

impl PhaseState {
    /// Empty phase over `n` vertices; fill it with [`Self::ingest_edge`],
    /// [`Self::finish_vertex`] and [`Self::finish_pair`].
    pub fn empty(buckets: BucketPartition, horizon: u64, seed: u64) -> Self {
        let n = buckets.n();
        let nb = buckets.count();
        Self {
            graph: DynamicGraph::empty(n),
            base: DynamicGraph::empty(n),
            buffer: BTreeSet::new(),
            cross: vec![vec![BTreeSet::new(); nb]; n],
            partner: vec![vec![None; nb]; n],
            partnership: BTreeMap::new(),
            witness: BTreeMap::new(),
            uses: BTreeMap::new(),
            edge_load: BTreeMap::new(),
            load_index: BTreeSet::new(),
            schedule: Schedule::new(horizon, false),
            output: BTreeMap::new(),
            touched: BTreeMap::new(),
            track: false,
            clock: 0,
            updates: 0,
            horizon,
            rng: ChaCha8Rng::seed_from_u64(seed),
            resamples: 0,
            last_resamples: 0,
            ops: OpCounter::new(),
            recourse: RecourseLog::new(),
            buckets,
        }
    }

    /// Starts a phase over `g`: indexes every edge, picks partners and
    /// samples a witness for every pair with a common neighbour.
    pub fn start(g: &DynamicGraph, buckets: BucketPartition, horizon: u64, seed: u64) -> Self {
        let mut s = Self::empty(buckets, horizon, seed);
        for e in g.edges() {
            s.ingest_edge(e);
        }
        for v in 0..g.n() {
            s.finish_vertex(v);
        }
        let pairs: Vec<Pair> = s.partnership.keys().copied().collect();
        for p in pairs {
            s.finish_pair(p);
        }
        s.seal();
        s
    }

    /// Ends construction: later updates report their deltas.
    pub fn seal(&mut self) {
        self.track = true;
    }

    /// Smallest pair with a common neighbour that is greater than `after`.
    pub fn pair_after(&self, after: Option<Pair>) -> Option<Pair> {
        use std::ops::Bound::{Excluded, Unbounded};
        let lower = after.map_or(Unbounded, Excluded);
        self.partnership.range((lower, Unbounded)).next().map(|(&p, _)| p)
    }

    fn add_ref(&mut self, e: EdgeKey) {
        let c = self.output.entry(e).or_insert(0);
        if *c == 0 && self.track {
            self.touched.entry(e).or_insert(false);
        }
        *c += 1;
        self.ops.charge(Module::Resample3, 1);
    }

    fn drop_ref(&mut self, e: EdgeKey) {
        let c = self.output.get_mut(&e).expect("dropping an unreferenced edge");
        *c -= 1;
        if *c == 0 {
            self.output.remove(&e);
            if self.track {
                self.touched.entry(e).or_insert(true);
            }
        }
        self.ops.charge(Module::Resample3, 1);
    }

    fn bump_load(&mut self, e: EdgeKey, up: bool) {
        let old = self.edge_load.get(&e).copied().unwrap_or(0);
        let new = if up { old + 1 } else { old - 1 };
        if old > 0 {
            self.load_index.remove(&(old, Reverse(e)));
        }
        if new > 0 {
            self.load_index.insert((new, Reverse(e)));
            self.edge_load.insert(e, new);
        } else {
            self.edge_load.remove(&e);
        }
        self.ops.charge(Module::Resample3, 3);
    }

    /// Adds a base edge to the index (phase construction only).
    pub fn ingest_edge(&mut self, e: EdgeKey) {
        self.base.insert_edge(e).expect("ingested edge already present");
        self.graph.insert_edge(e).expect("ingested edge already present");
        let (u, v) = e.endpoints();
        let (bu, bv) = (self.buckets.bucket_of(u), self.buckets.bucket_of(v));
        let mut work = 2;
        for (a, b, ia) in [(u, v, bu), (v, u, bv)] {
            // `b` becomes a common neighbour of `a` and every other
            // neighbour of `b` in `a`'s bucket.
            let others: Vec<VertexId> = self.cross[b][ia].iter().copied().collect();
            for a2 in others {
                self.partnership.entry(pair(a, a2)).or_default().insert(b);
                work += 1;
            }
        }
        self.cross[u][bv].insert(v);
        self.cross[v][bu].insert(u);
        if bu == bv {
            self.add_ref(e);
        }
        self.ops.charge(Module::Resample3, work);
    }

    /// Picks the partners of `v` (phase construction only).
    pub fn finish_vertex(&mut self, v: VertexId) {
        let own = self.buckets.bucket_of(v);
        for i in 0..self.buckets.count() {
            if i == own {
                continue;
            }
            if let Some(&c) = self.cross[v][i].first() {
                self.partner[v][i] = Some(c);
                self.add_ref(EdgeKey::of(v, c));
            }
        }
        self.ops.charge(Module::Resample3, self.buckets.count() as u64);
    }

    /// Samples the first witness of `p` (phase construction only).
    pub fn finish_pair(&mut self, p: Pair) {
        self.resample(p);
    }

    fn unassign(&mut self, p: Pair) {
        if let Some(w) = self.witness.remove(&p) {
            for (x, x2) in [(p.0, p.1), (p.1, p.0)] {
                let set = self.uses.get_mut(&(x, w)).expect("witness use recorded");
                set.remove(&x2);
                if set.is_empty() {
                    self.uses.remove(&(x, w));
                }
                let e = EdgeKey::of(x, w);
                self.bump_load(e, false);
                self.drop_ref(e);
            }
            self.ops.charge(Module::Resample3, 3);
        }
    }

    fn resample(&mut self, p: Pair) {
        self.unassign(p);
        self.resamples += 1;
        self.ops.charge(Module::Resample3, 2);
        let Some(set) = self.partnership.get(&p) else {
            return;
        };
        let w = set[self.rng.gen_range(0..set.len())];
        self.witness.insert(p, w);
        for (x, x2) in [(p.0, p.1), (p.1, p.0)] {
            self.uses.entry((x, w)).or_default().insert(x2);
            let e = EdgeKey::of(x, w);
            self.bump_load(e, true);
            self.add_ref(e);
        }
        self.ops.charge(Module::Resample3, 3);
    }

    fn finish_update(&mut self) -> SpannerDelta {
        let mut delta = SpannerDelta::default();
        for (e, was) in std::mem::take(&mut self.touched) {
            match (was, self.output.contains_key(&e)) {
                (false, true) => delta.added.push(e),
                (true, false) => delta.removed.push(e),
                _ => {}
            }
        }
        self.recourse
            .record(delta.added.len() as u64, delta.removed.len() as u64);
        self.ops.end_step();
        delta
    }

    fn check_room(&self) -> Result<(), SpannerError> {
        if self.updates >= self.horizon {
            return Err(SpannerError::PhaseExhausted(self.updates));
        }
        Ok(())
    }

    /// Inserts `e`; it joins the output verbatim until the next phase.
    pub fn r3_insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.check_room()?;
        self.graph.insert_edge(e)?;
        self.updates += 1;
        self.buffer.insert(e);
        self.add_ref(e);
        self.ops.charge(Module::Graph, 2);
        self.last_resamples = 0;
        Ok(self.finish_update())
    }

    /// Deletes `e`, repairs partners and resamples the pairs due now.
    pub fn r3_delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.check_room()?;
        self.graph.check_edge(e)?;
        if !self.graph.has_edge(e) {
            return Err(GraphError::EdgeMissing(e).into());
        }
        self.graph.delete_edge(e)?;
        self.updates += 1;
        self.ops.charge(Module::Graph, 2);
        if self.buffer.remove(&e) {
            self.drop_ref(e);
            self.last_resamples = 0;
            return Ok(self.finish_update());
        }
        self.base.delete_edge(e)?;
        let (u, v) = e.endpoints();
        let (bu, bv) = (self.buckets.bucket_of(u), self.buckets.bucket_of(v));

        // Pairs whose witness path runs through `e` are touched.
        let mut touched: Vec<Pair> = Vec::new();
        for (a, b) in [(u, v), (v, u)] {
            if let Some(set) = self.uses.get(&(a, b)) {
                touched.extend(set.iter().map(|&a2| pair(a, a2)));
            }
        }
        self.ops.charge(Module::Resample3, 2 + touched.len() as u64);
        for &p in &touched {
            self.unassign(p);
            self.schedule.touch(p, self.clock);
            self.ops.charge(Module::Resample3, 64 - self.horizon.leading_zeros() as u64);
        }

        self.cross[u][bv].remove(&v);
        self.cross[v][bu].remove(&u);
        let mut work = 2;
        for (a, b, ia) in [(u, v, bu), (v, u, bv)] {
            let others: Vec<VertexId> = self.cross[b][ia].iter().copied().collect();
            for a2 in others {
                let p = pair(a, a2);
                let set = self.partnership.get_mut(&p).expect("partnership indexed");
                set.swap_remove(&b);
                if set.is_empty() {
                    self.partnership.remove(&p);
                }
                work += 2;
            }
        }
        self.ops.charge(Module::Resample3, work);

        if bu == bv {
            self.drop_ref(e);
        } else {
            for (x, y, i) in [(u, v, bv), (v, u, bu)] {
                if self.partner[x][i] == Some(y) {
                    self.drop_ref(e);
                    let next = self.cross[x][i].first().copied();
                    self.partner[x][i] = next;
                    if let Some(c) = next {
                        self.add_ref(EdgeKey::of(x, c));
                    }
                    self.ops.charge(Module::Resample3, 2);
                }
            }
        }

        self.clock += 1;
        let due = self.schedule.drain(self.clock);
        self.ops.charge(Module::Resample3, 1 + due.len() as u64);
        for &p in &due {
            self.resample(p);
        }
        self.last_resamples = due.len() as u64;
        Ok(self.finish_update())
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    /// The indexed graph: edges present at phase start, minus deletions.
    pub fn base(&self) -> &DynamicGraph {
        &self.base
    }

    pub fn buffer(&self) -> &BTreeSet<EdgeKey> {
        &self.buffer
    }

    pub fn buckets(&self) -> &BucketPartition {
        &self.buckets
    }

    pub fn partner(&self, v: VertexId, i: usize) -> Option<VertexId> {
        self.partner[v][i]
    }

    pub fn partnership(&self, u: VertexId, u2: VertexId) -> Option<&IndexSet<VertexId>> {
        self.partnership.get(&pair(u, u2))
    }

    pub fn witness(&self, u: VertexId, u2: VertexId) -> Option<VertexId> {
        self.witness.get(&pair(u, u2)).copied()
    }

    pub fn witnesses(&self) -> &BTreeMap<Pair, VertexId> {
        &self.witness
    }

    /// Number of chosen witness paths through `e`.
    pub fn edge_load(&self, e: EdgeKey) -> u64 {
        self.edge_load.get(&e).copied().unwrap_or(0)
    }

    /// Most loaded edge, smallest key on ties.
    pub fn max_load_edge(&self) -> Option<(EdgeKey, u64)> {
        self.load_index.last().map(|&(l, Reverse(e))| (e, l))
    }

    pub fn spanner(&self) -> BTreeSet<EdgeKey> {
        self.output.keys().copied().collect()
    }

    pub fn output(&self) -> &BTreeMap<EdgeKey, u32> {
        &self.output
    }

    pub fn contains(&self, e: EdgeKey) -> bool {
        self.output.contains_key(&e)
    }

    pub fn spanner_len(&self) -> usize {
        self.output.len()
    }

    /// Base-edge deletions so far in this phase.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Updates of any kind so far in this phase.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn is_exhausted(&self) -> bool {
        self.updates >= self.horizon
    }

    /// Resample calls so far, including the initial sampling.
    pub fn total_resamples(&self) -> u64 {
        self.resamples
    }

    pub fn last_resamples(&self) -> u64 {
        self.last_resamples
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }

    pub fn schedule(&self) -> &Schedule<Pair> {
        &self.schedule
    }

    /// Recomputes partnerships, partners, witness uses and output
    /// multiplicities from scratch and compares them.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.graph.n();
        let nb = self.buckets.count();
        let mut g = self.base.clone();
        for &e in &self.buffer {
            if self.base.has_edge(e) {
                return Err(format!("{e} is both indexed and buffered"));
            }
            g.insert_edge(e).map_err(|err| err.to_string())?;
        }
        if g.to_canonical() != self.graph.to_canonical() {
            return Err("graph differs from base plus buffer".into());
        }
        let mut cross = vec![vec![BTreeSet::new(); nb]; n];
        for e in self.base.edges() {
            let (u, v) = e.endpoints();
            cross[u][self.buckets.bucket_of(v)].insert(v);
            cross[v][self.buckets.bucket_of(u)].insert(u);
        }
        if cross != self.cross {
            return Err("cross sets differ from the base graph".into());
        }
        let mut partnership: BTreeMap<Pair, BTreeSet<VertexId>> = BTreeMap::new();
        for w in 0..n {
            for i in 0..nb {
                let ns: Vec<VertexId> = cross[w][i].iter().copied().collect();
                for (k, &a) in ns.iter().enumerate() {
                    for &b in &ns[k + 1..] {
                        partnership.entry((a, b)).or_default().insert(w);
                    }
                }
            }
        }
        let maintained: BTreeMap<Pair, BTreeSet<VertexId>> = self
            .partnership
            .iter()
            .map(|(&p, s)| (p, s.iter().copied().collect()))
            .collect();
        if partnership != maintained {
            return Err("partnerships differ from a rebuild".into());
        }
        let mut refs: BTreeMap<EdgeKey, u32> = BTreeMap::new();
        for &e in &self.buffer {
            *refs.entry(e).or_default() += 1;
        }
        for e in self.base.edges() {
            if self.buckets.bucket_of(e.lo()) == self.buckets.bucket_of(e.hi()) {
                *refs.entry(e).or_default() += 1;
            }
        }
        for v in 0..n {
            for i in 0..nb {
                if i == self.buckets.bucket_of(v) {
                    continue;
                }
                match (self.partner[v][i], cross[v][i].is_empty()) {
                    (None, true) => {}
                    (Some(c), false) if cross[v][i].contains(&c) => {
                        *refs.entry(EdgeKey::of(v, c)).or_default() += 1;
                    }
                    (c, _) => return Err(format!("partner {c:?} of {v} in bucket {i} is invalid")),
                }
            }
        }
        let mut uses: BTreeMap<(VertexId, VertexId), BTreeSet<VertexId>> = BTreeMap::new();
        let mut load: BTreeMap<EdgeKey, u64> = BTreeMap::new();
        for p in partnership.keys() {
            if !self.witness.contains_key(p) {
                return Err(format!("pair {p:?} has common neighbours but no witness"));
            }
        }
        for (&(a, b), &w) in &self.witness {
            if !partnership.get(&(a, b)).is_some_and(|s| s.contains(&w)) {
                return Err(format!("witness {w} of ({a},{b}) is not a common neighbour"));
            }
            for (x, x2) in [(a, b), (b, a)] {
                uses.entry((x, w)).or_default().insert(x2);
                *load.entry(EdgeKey::of(x, w)).or_default() += 1;
                *refs.entry(EdgeKey::of(x, w)).or_default() += 1;
            }
        }
        if uses != self.uses || load != self.edge_load {
            return Err("witness uses out of date".into());
        }
        let indexed: BTreeSet<(u64, Reverse<EdgeKey>)> =
            load.iter().map(|(&e, &l)| (l, Reverse(e))).collect();
        if indexed != self.load_index {
            return Err("load index out of date".into());
        }
        if refs != self.output {
            return Err("output multiplicities differ from E1, E2, E3 and the buffer".into());
        }
        Ok(())
    }
}

/// Randomized 3-spanner that rebuilds from scratch every `L` updates.
#[derive(Debug, Clone)]
pub struct Resample3Spanner {
    phase: PhaseState,
    phase_len: u64,
    master: ChaCha8Rng,
    phases: u64,
    /// Resample calls of every finished phase, initial sampling included.
    phase_totals: Vec<u64>,
    last_resamples: u64,
    ops: OpCounter,
    recourse: RecourseLog,
}

impl Resample3Spanner {
    pub fn new(g: &DynamicGraph, phase_len: u64, seed: u64) -> Result<Self, SpannerError> {
        Self::with_buckets(g, BucketPartition::round_robin(g.n()), phase_len, seed)
    }

    pub fn with_buckets(
        g: &DynamicGraph,
        buckets: BucketPartition,
        phase_len: u64,
        seed: u64,
    ) -> Result<Self, SpannerError> {
        if phase_len == 0 {
            return Err(SpannerError::InvalidParameter("phase length must be positive".into()));
        }
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let phase = PhaseState::start(g, buckets, phase_len, master.gen());
        Ok(Self {
            phase,
            phase_len,
            master,
            phases: 1,
            phase_totals: Vec::new(),
            last_resamples: 0,
            ops: OpCounter::new(),
            recourse: RecourseLog::new(),
        })
    }

    fn rollover(&mut self) -> SpannerDelta {
        let before = self.phase.spanner();
        let seed = self.master.gen();
        let next = PhaseState::start(
            self.phase.graph(),
            self.phase.buckets().clone(),
            self.phase_len,
            seed,
        );
        self.ops.charge(Module::Resample3, next.ops().total());
        self.phase_totals.push(self.phase.total_resamples());
        self.phase = next;
        self.phases += 1;
        diff(&before, &self.phase.spanner())
    }

    fn run(
        &mut self,
        f: impl FnOnce(&mut PhaseState) -> Result<SpannerDelta, SpannerError>,
    ) -> Result<SpannerDelta, SpannerError> {
        let mut pre = None;
        if self.phase.is_exhausted() {
            pre = Some(self.rollover());
        }
        let before = self.phase.ops().total();
        let resamples_before = self.phase.total_resamples();
        let result = f(&mut self.phase);
        self.ops
            .charge(Module::Resample3, self.phase.ops().total() - before);
        self.last_resamples = self.phase.total_resamples() - resamples_before;
        let delta = match (pre, result) {
            (_, Err(err)) => {
                self.ops.end_step();
                return Err(err);
            }
            (None, Ok(d)) => d,
            (Some(p), Ok(d)) => compose(p, d),
        };
        self.recourse
            .record(delta.added.len() as u64, delta.removed.len() as u64);
        self.ops.end_step();
        Ok(delta)
    }

    pub fn phase(&self) -> &PhaseState {
        &self.phase
    }

    pub fn phase_len(&self) -> u64 {
        self.phase_len
    }

    pub fn phases(&self) -> u64 {
        self.phases
    }

    pub fn finished_phase_totals(&self) -> &[u64] {
        &self.phase_totals
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }
}

/// Net effect of applying `first` and then `second`.
pub fn compose(first: SpannerDelta, second: SpannerDelta) -> SpannerDelta {
    let mut state: BTreeMap<EdgeKey, i8> = BTreeMap::new();
    for e in first.added.iter().chain(&second.added) {
        *state.entry(*e).or_default() += 1;
    }
    for e in first.removed.iter().chain(&second.removed) {
        *state.entry(*e).or_default() -= 1;
    }
    let mut out = SpannerDelta::default();
    for (e, s) in state {
        match s.cmp(&0) {
            std::cmp::Ordering::Greater => out.added.push(e),
            std::cmp::Ordering::Less => out.removed.push(e),
            std::cmp::Ordering::Equal => {}
        }
    }
    out
}

impl SpannerView for PhaseState {
    fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    fn spanner_edges(&self) -> Vec<EdgeKey> {
        self.output.keys().copied().collect()
    }

    fn edge_loads(&self) -> Option<Vec<(EdgeKey, u64)>> {
        Some(self.edge_load.iter().map(|(&e, &l)| (e, l)).collect())
    }

    fn witnesses(&self) -> Option<Vec<(Pair, VertexId)>> {
        Some(self.witness.iter().map(|(&p, &w)| (p, w)).collect())
    }

    fn max_load_edge(&self) -> Option<(EdgeKey, u64)> {
        PhaseState::max_load_edge(self)
    }
}

impl SpannerView for Resample3Spanner {
    fn graph(&self) -> &DynamicGraph {
        &self.phase.graph
    }

    fn spanner_edges(&self) -> Vec<EdgeKey> {
        self.phase.spanner_edges()
    }

    fn edge_loads(&self) -> Option<Vec<(EdgeKey, u64)>> {
        self.phase.edge_loads()
    }

    fn witnesses(&self) -> Option<Vec<(Pair, VertexId)>> {
        SpannerView::witnesses(&self.phase)
    }

    fn max_load_edge(&self) -> Option<(EdgeKey, u64)> {
        self.phase.max_load_edge()
    }
}

impl DynamicSpanner for Resample3Spanner {
    fn name(&self) -> &'static str {
        "resample3"
    }

    fn stretch(&self) -> usize {
        3
    }

    fn insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.run(|p| p.r3_insert(e))
    }

    fn delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.run(|p| p.r3_delete(e))
    }

    fn spanner_len(&self) -> usize {
        self.phase.spanner_len()
    }

    fn last_ops(&self) -> u64 {
        self.ops.last_step()
    }

    fn last_resamples(&self) -> u64 {
        self.last_resamples
    }
}
