//! Deterministic fully dynamic 3-spanner with worst-case update work.
//!
//! Vertices are split into buckets. Every vertex `v` outside bucket `i`
//! with a neighbour in `V_i` keeps one such neighbour `c_i(v)` as its
//! center; the edge `(v, c_i(v))` is a type-1 edge. The vertices sharing a
//! center `u` form the cluster `C+(u)`. For every ordered pair `u != u'`
//! inside one bucket, one edge from `u` into `C+(u')` is kept as a type-2
//! edge. Every "pick one" choice is made by minimum key, so a fresh build is
//! fully determined by the graph and the partition.

use std::collections::{BTreeMap, BTreeSet};

use crate::buckets::BucketPartition;
use crate::error::SpannerError;
use crate::graph::{DynamicGraph, EdgeKey, GraphError, VertexId};
use crate::instrumentation::{Module, OpCounter, RecourseLog};
use crate::spanner::{DynamicSpanner, SpannerDelta, SpannerView};

/// Which roles an edge plays in the spanner.
///
/// Seen from one endpoint `a`, an edge is either the type-1 edge of `a`
/// (its other endpoint is `a`'s center) or the chosen type-2 edge of the
/// pair `(a, .)` it belongs to. Each endpoint contributes at most one of
/// each, so four flags cover every combination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoleTags(u8);

impl RoleTags {
    const TYPE1_LO: u8 = 1;
    const TYPE1_HI: u8 = 2;
    const TYPE2_LO: u8 = 4;
    const TYPE2_HI: u8 = 8;

    fn bit(e: EdgeKey, v: VertexId, type2: bool) -> u8 {
        match (v == e.lo(), type2) {
            (true, false) => Self::TYPE1_LO,
            (false, false) => Self::TYPE1_HI,
            (true, true) => Self::TYPE2_LO,
            (false, true) => Self::TYPE2_HI,
        }
    }

    /// `e` is the type-1 edge of endpoint `v`.
    pub fn is_type1_of(self, e: EdgeKey, v: VertexId) -> bool {
        self.0 & Self::bit(e, v, false) != 0
    }

    /// `e` is the chosen type-2 edge of a pair `(v, .)`.
    pub fn is_type2_from(self, e: EdgeKey, v: VertexId) -> bool {
        self.0 & Self::bit(e, v, true) != 0
    }

    pub fn is_type1(self) -> bool {
        self.0 & (Self::TYPE1_LO | Self::TYPE1_HI) != 0
    }

    pub fn is_type2(self) -> bool {
        self.0 & (Self::TYPE2_LO | Self::TYPE2_HI) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone)]
pub struct Det3State {
    graph: DynamicGraph,
    buckets: BucketPartition,
    /// `cross[v][i]` = neighbours of `v` in bucket `i`.
    cross: Vec<Vec<BTreeSet<VertexId>>>,
    /// `center[v][i]` = `c_i(v)`; `Some(v)` when `v` is in bucket `i`.
    center: Vec<Vec<Option<VertexId>>>,
    /// `members[u]` = `C(u)`.
    members: Vec<BTreeSet<VertexId>>,
    /// `cluster[(u, u')]` = far endpoints of `E(u, C+(u'))`.
    cluster: BTreeMap<(VertexId, VertexId), BTreeSet<VertexId>>,
    chosen: BTreeMap<(VertexId, VertexId), VertexId>,
    roles: BTreeMap<EdgeKey, RoleTags>,
    ops: OpCounter,
    recourse: RecourseLog,
    /// Spanner membership of every edge touched in the current update,
    /// as it was before the update.
    touched: BTreeMap<EdgeKey, bool>,
    skip_repair: bool,
}

impl Det3State {
    /// Builds the structure over `g` with round-robin buckets.
    pub fn build(g: DynamicGraph) -> Self {
        let buckets = BucketPartition::round_robin(g.n());
        Self::build_with(g, buckets)
    }

    /// Builds the structure over `g` with an explicit partition.
    ///
    /// # Panics
    /// If the partition does not cover exactly the vertices of `g`.
    pub fn build_with(g: DynamicGraph, buckets: BucketPartition) -> Self {
        assert_eq!(g.n(), buckets.n(), "partition does not match graph");
        let n = g.n();
        let nb = buckets.count();
        let mut center = vec![vec![None; nb]; n];
        for (v, row) in center.iter_mut().enumerate() {
            row[buckets.bucket_of(v)] = Some(v);
        }
        let mut s = Self {
            graph: DynamicGraph::empty(n),
            cross: vec![vec![BTreeSet::new(); nb]; n],
            center,
            members: vec![BTreeSet::new(); n],
            cluster: BTreeMap::new(),
            chosen: BTreeMap::new(),
            roles: BTreeMap::new(),
            ops: OpCounter::new(),
            recourse: RecourseLog::new(),
            touched: BTreeMap::new(),
            skip_repair: false,
            buckets,
        };
        for e in g.edges() {
            s.graph.insert_edge(e).expect("edges of a valid graph");
            let (u, v) = e.endpoints();
            let (bu, bv) = (s.buckets.bucket_of(u), s.buckets.bucket_of(v));
            s.cross[u][bv].insert(v);
            s.cross[v][bu].insert(u);
        }
        for v in 0..n {
            for i in 0..nb {
                if i == s.buckets.bucket_of(v) {
                    continue;
                }
                if let Some(&c) = s.cross[v][i].first() {
                    s.center[v][i] = Some(c);
                    s.members[c].insert(v);
                    s.set_tag(EdgeKey::of(v, c), v, false, true);
                }
            }
        }
        for e in g.edges() {
            let (u, v) = e.endpoints();
            for (a, b) in [(u, v), (v, u)] {
                if let Some(c) = s.pair_of(a, b) {
                    s.cluster.entry((a, c)).or_default().insert(b);
                }
            }
        }
        let firsts: Vec<((VertexId, VertexId), VertexId)> = s
            .cluster
            .iter()
            .map(|(&k, set)| (k, *set.first().expect("no empty cluster sets")))
            .collect();
        for ((a, c), x) in firsts {
            s.chosen.insert((a, c), x);
            s.set_tag(EdgeKey::of(a, x), a, true, true);
        }
        s.touched.clear();
        s.ops.discard_pending();
        s
    }

    /// Disables the replacement of deleted spanner edges. Only useful for
    /// checking that the verifiers notice a broken spanner.
    #[doc(hidden)]
    pub fn set_skip_repair(&mut self, skip: bool) {
        self.skip_repair = skip;
    }

    /// The pair `(a, c)` whose set `E(a, C+(c))` holds the edge `(a, b)`,
    /// or `None` when the edge is `b`'s type-1 edge into `a`'s bucket.
    fn pair_of(&self, a: VertexId, b: VertexId) -> Option<VertexId> {
        let i = self.buckets.bucket_of(a);
        if self.buckets.bucket_of(b) == i {
            return Some(b);
        }
        let c = self.center[b][i].expect("a neighbour in the bucket implies a center");
        (c != a).then_some(c)
    }

    fn set_tag(&mut self, e: EdgeKey, from: VertexId, type2: bool, on: bool) {
        let before = self.roles.contains_key(&e);
        self.touched.entry(e).or_insert(before);
        let bit = RoleTags::bit(e, from, type2);
        let tags = self.roles.entry(e).or_default();
        if on {
            tags.0 |= bit;
        } else {
            tags.0 &= !bit;
        }
        if tags.is_empty() {
            self.roles.remove(&e);
        }
        self.ops.charge(Module::Det3, 1);
    }

    fn cluster_add(&mut self, a: VertexId, c: VertexId, x: VertexId) {
        let set = self.cluster.entry((a, c)).or_default();
        set.insert(x);
        let first = set.len() == 1;
        self.ops.charge(Module::Det3, 2);
        if first {
            self.chosen.insert((a, c), x);
            self.set_tag(EdgeKey::of(a, x), a, true, true);
            self.ops.charge(Module::Det3, 1);
        }
    }

    fn cluster_remove(&mut self, a: VertexId, c: VertexId, x: VertexId) {
        let set = self.cluster.get_mut(&(a, c)).expect("edge listed in its pair");
        set.remove(&x);
        let replacement = set.first().copied();
        if set.is_empty() {
            self.cluster.remove(&(a, c));
        }
        self.ops.charge(Module::Det3, 3);
        if self.chosen.get(&(a, c)) == Some(&x) {
            self.set_tag(EdgeKey::of(a, x), a, true, false);
            self.chosen.remove(&(a, c));
            self.ops.charge(Module::Det3, 1);
            if let Some(y) = replacement.filter(|_| !self.skip_repair) {
                self.chosen.insert((a, c), y);
                self.set_tag(EdgeKey::of(a, y), a, true, true);
                self.ops.charge(Module::Det3, 1);
            }
        }
    }

    fn attach(&mut self, a: VertexId, b: VertexId) {
        self.ops.charge(Module::Det3, 1);
        if let Some(c) = self.pair_of(a, b) {
            self.cluster_add(a, c, b);
        }
    }

    fn detach(&mut self, a: VertexId, b: VertexId) {
        self.ops.charge(Module::Det3, 1);
        if let Some(c) = self.pair_of(a, b) {
            self.cluster_remove(a, c, b);
        }
    }

    fn assign_center(&mut self, x: VertexId, i: usize, c: VertexId) {
        self.center[x][i] = Some(c);
        self.members[c].insert(x);
        self.ops.charge(Module::Det3, 2);
        if !self.skip_repair {
            self.set_tag(EdgeKey::of(x, c), x, false, true);
        }
    }

    /// Moves the edges `(w, x)`, `w` in bucket `i`, from the pair `(w, old)`
    /// to the pair of `x`'s new center.
    fn migrate(&mut self, x: VertexId, i: usize, old: VertexId, new: Option<VertexId>) {
        let ws: Vec<VertexId> = self.cross[x][i].iter().copied().collect();
        self.ops.charge(Module::Det3, ws.len() as u64);
        for w in ws {
            self.cluster_remove(w, old, x);
            if let Some(nc) = new.filter(|&nc| nc != w) {
                self.cluster_add(w, nc, x);
            }
        }
    }

    fn finish_update(&mut self) -> SpannerDelta {
        let mut delta = SpannerDelta::default();
        for (e, was) in std::mem::take(&mut self.touched) {
            match (was, self.roles.contains_key(&e)) {
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

    pub fn det3_insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.graph.insert_edge(e)?;
        self.ops.charge(Module::Graph, 2);
        let (u, v) = e.endpoints();
        let (bu, bv) = (self.buckets.bucket_of(u), self.buckets.bucket_of(v));
        self.cross[u][bv].insert(v);
        self.cross[v][bu].insert(u);
        self.ops.charge(Module::Det3, 2);
        if bu != bv {
            // A center is only created when the edge is the sole member of
            // the cross set, so the vertex has no other neighbour to migrate.
            for (x, y, i) in [(v, u, bu), (u, v, bv)] {
                self.ops.charge(Module::Det3, 1);
                if self.center[x][i].is_none() {
                    self.assign_center(x, i, y);
                }
            }
        }
        self.attach(u, v);
        self.attach(v, u);
        Ok(self.finish_update())
    }

    pub fn det3_delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.graph.check_edge(e)?;
        if !self.graph.has_edge(e) {
            return Err(GraphError::EdgeMissing(e).into());
        }
        let (u, v) = e.endpoints();
        self.detach(u, v);
        self.detach(v, u);
        let (bu, bv) = (self.buckets.bucket_of(u), self.buckets.bucket_of(v));
        self.cross[u][bv].remove(&v);
        self.cross[v][bu].remove(&u);
        self.graph.delete_edge(e)?;
        self.ops.charge(Module::Graph, 2);
        self.ops.charge(Module::Det3, 2);
        if bu != bv {
            for (x, y, i) in [(v, u, bu), (u, v, bv)] {
                self.ops.charge(Module::Det3, 1);
                if self.center[x][i] != Some(y) {
                    continue;
                }
                self.set_tag(e, x, false, false);
                self.members[y].remove(&x);
                self.center[x][i] = None;
                let new = self.cross[x][i].first().copied();
                self.ops.charge(Module::Det3, 3);
                if let Some(nc) = new {
                    self.assign_center(x, i, nc);
                }
                self.migrate(x, i, y, new);
            }
        }
        debug_assert!(!self.roles.contains_key(&e), "deleted edge still tagged");
        Ok(self.finish_update())
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn buckets(&self) -> &BucketPartition {
        &self.buckets
    }

    pub fn center(&self, v: VertexId, i: usize) -> Option<VertexId> {
        self.center[v][i]
    }

    /// `C(u)`: outside vertices whose center in `u`'s bucket is `u`.
    pub fn cluster_members(&self, u: VertexId) -> &BTreeSet<VertexId> {
        &self.members[u]
    }

    /// Far endpoints of `E(u, C+(u'))`.
    pub fn cluster_edges(&self, u: VertexId, u2: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.cluster.get(&(u, u2))
    }

    /// The chosen type-2 edge of the pair `(u, u')`.
    pub fn chosen(&self, u: VertexId, u2: VertexId) -> Option<EdgeKey> {
        self.chosen.get(&(u, u2)).map(|&x| EdgeKey::of(u, x))
    }

    pub fn roles(&self, e: EdgeKey) -> RoleTags {
        self.roles.get(&e).copied().unwrap_or_default()
    }

    pub fn spanner(&self) -> BTreeSet<EdgeKey> {
        self.roles.keys().copied().collect()
    }

    pub fn spanner_len(&self) -> usize {
        self.roles.len()
    }

    pub fn contains(&self, e: EdgeKey) -> bool {
        self.roles.contains_key(&e)
    }

    /// Elementary operations charged to the last update.
    pub fn opcost_last(&self) -> u64 {
        self.ops.last_step()
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }

    /// Recomputes every index from the graph and the maintained centers
    /// and compares it with the maintained one.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.graph.n();
        let nb = self.buckets.count();
        let mut cross = vec![vec![BTreeSet::new(); nb]; n];
        for e in self.graph.edges() {
            let (u, v) = e.endpoints();
            cross[u][self.buckets.bucket_of(v)].insert(v);
            cross[v][self.buckets.bucket_of(u)].insert(u);
        }
        if cross != self.cross {
            return Err("cross sets differ from the graph".into());
        }
        let mut members = vec![BTreeSet::new(); n];
        let mut roles: BTreeMap<EdgeKey, RoleTags> = BTreeMap::new();
        for v in 0..n {
            for i in 0..nb {
                let c = self.center[v][i];
                if i == self.buckets.bucket_of(v) {
                    if c != Some(v) {
                        return Err(format!("center of {v} in its own bucket is {c:?}"));
                    }
                    continue;
                }
                match c {
                    None if !cross[v][i].is_empty() => {
                        return Err(format!("{v} has neighbours in bucket {i} but no center"));
                    }
                    Some(c) if !cross[v][i].contains(&c) => {
                        return Err(format!("center {c} of {v} is not a neighbour in bucket {i}"));
                    }
                    Some(c) => {
                        members[c].insert(v);
                        let e = EdgeKey::of(v, c);
                        roles.entry(e).or_default().0 |= RoleTags::bit(e, v, false);
                    }
                    None => {}
                }
            }
        }
        if members != self.members {
            return Err("cluster membership is not the inverse of the centers".into());
        }
        let mut cluster: BTreeMap<(VertexId, VertexId), BTreeSet<VertexId>> = BTreeMap::new();
        for e in self.graph.edges() {
            let (u, v) = e.endpoints();
            for (a, b) in [(u, v), (v, u)] {
                if let Some(c) = self.pair_of(a, b) {
                    cluster.entry((a, c)).or_default().insert(b);
                }
            }
        }
        if cluster != self.cluster {
            return Err("cluster edge sets differ from a rebuild".into());
        }
        if !self.chosen.keys().eq(cluster.keys()) {
            return Err("a nonempty cluster edge set has no chosen edge".into());
        }
        for (&(a, c), &x) in &self.chosen {
            if !cluster[&(a, c)].contains(&x) {
                return Err(format!("chosen edge ({a},{x}) not in E({a}, C+({c}))"));
            }
            let e = EdgeKey::of(a, x);
            roles.entry(e).or_default().0 |= RoleTags::bit(e, a, true);
        }
        if roles != self.roles {
            return Err("role tags disagree with centers and chosen edges".into());
        }
        Ok(())
    }
}

impl SpannerView for Det3State {
    fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    fn spanner_edges(&self) -> Vec<EdgeKey> {
        self.roles.keys().copied().collect()
    }
}

impl DynamicSpanner for Det3State {
    fn name(&self) -> &'static str {
        "det3"
    }

    fn stretch(&self) -> usize {
        3
    }

    fn insert(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.det3_insert(e)
    }

    fn delete(&mut self, e: EdgeKey) -> Result<SpannerDelta, SpannerError> {
        self.det3_delete(e)
    }

    fn spanner_len(&self) -> usize {
        self.roles.len()
    }

    fn last_ops(&self) -> u64 {
        self.ops.last_step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(u: usize, v: usize) -> EdgeKey {
        EdgeKey::of(u, v)
    }

    fn set(edges: &[(usize, usize)]) -> BTreeSet<EdgeKey> {
        edges.iter().map(|&(u, v)| e(u, v)).collect()
    }

    #[test]
    fn empty_graph() {
        let s = Det3State::build(DynamicGraph::empty(9));
        assert_eq!(s.spanner_len(), 0);
        s.check_invariants().unwrap();
    }

    #[test]
    fn k4_two_buckets() {
        // Centers: c_0(2) = c_0(3) = 0, c_1(0) = c_1(1) = 2. Pair choices:
        // (0,1) -> (0,1), (1,0) -> min{(0,1),(1,2),(1,3)} = (0,1),
        // (2,3) -> (2,3), (3,2) -> min{(2,3),(0,3),(1,3)} = (0,3).
        let g = DynamicGraph::from_pairs(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let p = BucketPartition::from_buckets(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let s = Det3State::build_with(g, p);
        assert_eq!(s.spanner(), set(&[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]));
        assert_eq!(s.chosen(3, 2), Some(e(0, 3)));
        assert_eq!(s.center(3, 0), Some(0));
        assert!(s.roles(e(0, 2)).is_type1_of(e(0, 2), 0));
        assert!(s.roles(e(0, 2)).is_type1_of(e(0, 2), 2));
        s.check_invariants().unwrap();
    }

    #[test]
    fn star_keeps_every_edge() {
        let pairs: Vec<(usize, usize)> = (1..10).map(|v| (0, v)).collect();
        let g = DynamicGraph::from_pairs(10, pairs).unwrap();
        let s = Det3State::build(g);
        assert_eq!(s.spanner_len(), 9);
    }

    #[test]
    fn path_partner_loss() {
        let g = DynamicGraph::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        let p = BucketPartition::from_buckets(3, vec![vec![0, 1], vec![2]]).unwrap();
        let mut s = Det3State::build_with(g, p);
        assert_eq!(s.center(2, 0), Some(1));
        let d = s.det3_delete(e(1, 2)).unwrap();
        assert_eq!(d.removed, vec![e(1, 2)]);
        assert!(d.added.is_empty());
        assert_eq!(s.center(2, 0), None);
        s.check_invariants().unwrap();
    }

    #[test]
    fn non_spanner_delete_changes_nothing() {
        let g = DynamicGraph::from_pairs(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let p = BucketPartition::from_buckets(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut s = Det3State::build_with(g, p);
        let d = s.det3_delete(e(1, 3)).unwrap();
        assert_eq!(d, SpannerDelta::default());
        assert!(s.opcost_last() <= 8 * 2);
        s.check_invariants().unwrap();
    }

    #[test]
    fn first_edge_is_type1_both_ways() {
        let mut s = Det3State::build(DynamicGraph::empty(9));
        // Buckets of size 3: 0 and 1 are in different buckets.
        let d = s.det3_insert(e(0, 1)).unwrap();
        assert_eq!(d.added, vec![e(0, 1)]);
        let r = s.roles(e(0, 1));
        assert!(r.is_type1_of(e(0, 1), 0) && r.is_type1_of(e(0, 1), 1));
        s.check_invariants().unwrap();
    }

    #[test]
    fn parallel_type2_insert_is_free() {
        // Grow K4 over buckets {0,1},{2,3}. When (1,3) arrives, 3's center
        // in bucket 0 is 0 and 1's center in bucket 1 is 2, so the edge lands
        // in E(1, C+(0)) and E(3, C+(2)), which already hold (0,1) and (2,3).
        let p = BucketPartition::from_buckets(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut s = Det3State::build_with(DynamicGraph::empty(4), p);
        for (u, v) in [(0, 1), (0, 2), (1, 2), (0, 3), (2, 3)] {
            s.det3_insert(e(u, v)).unwrap();
        }
        let d = s.det3_insert(e(1, 3)).unwrap();
        assert_eq!(d, SpannerDelta::default());
        assert_eq!(s.cluster_edges(1, 0).unwrap(), &BTreeSet::from([0, 2, 3]));
        s.check_invariants().unwrap();
    }

    #[test]
    fn intra_bucket_edge_is_type2_only() {
        let p = BucketPartition::from_buckets(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut s = Det3State::build_with(DynamicGraph::empty(4), p);
        let d = s.det3_insert(e(0, 1)).unwrap();
        assert_eq!(d.added, vec![e(0, 1)]);
        let r = s.roles(e(0, 1));
        assert!(!r.is_type1() && r.is_type2());
        assert!(r.is_type2_from(e(0, 1), 0) && r.is_type2_from(e(0, 1), 1));
    }

    #[test]
    fn duplicate_and_missing() {
        let mut s = Det3State::build(DynamicGraph::empty(4));
        s.det3_insert(e(0, 1)).unwrap();
        assert!(matches!(
            s.det3_insert(e(0, 1)),
            Err(SpannerError::Graph(GraphError::EdgeExists(_)))
        ));
        assert!(matches!(
            s.det3_delete(e(2, 3)),
            Err(SpannerError::Graph(GraphError::EdgeMissing(_)))
        ));
    }
}
