//! Ground-truth checks for maintained spanners.
//!
//! Everything here works on immutable snapshots and is deliberately written
//! without reusing the search routines of the algorithms it checks: the
//! stretch check uses ball intersection over bitsets, and the reference
//! greedy has its own exact BFS.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{BfsScratch, Distance, DynamicGraph, EdgeKey, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("spanner edge {0} is not an edge of the graph")]
    SpannerNotSubgraph(EdgeKey),
    #[error("inspection order is not a permutation of the edge set: {0}")]
    OrderNotPermutation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StretchReport {
    pub ok: bool,
    /// Edge with the largest spanner distance among the checked edges.
    pub worst_edge: Option<EdgeKey>,
    pub worst_dist: Distance,
}

/// Checks `dist_H(u, v) <= t` for the edges `(u, v)` of `g`.
///
/// For unweighted graphs checking edges is enough: a shortest path of
/// length `d` in `G` maps to a path of length at most `t * d` in `H`.
pub fn verify_stretch<I>(
    g: &DynamicGraph,
    h: I,
    t: usize,
    mode: CheckMode,
) -> Result<StretchReport, OracleError>
where
    I: IntoIterator<Item = EdgeKey>,
{
    let hg = spanner_graph(g, h)?;
    let report = match mode {
        CheckMode::Exact => exact_stretch(g, &hg, t),
        CheckMode::Sampled { count, seed } => sampled_stretch(g, &hg, t, count, seed),
    };
    Ok(report)
}

fn spanner_graph<I>(g: &DynamicGraph, h: I) -> Result<DynamicGraph, OracleError>
where
    I: IntoIterator<Item = EdgeKey>,
{
    let mut hg = DynamicGraph::empty(g.n());
    for e in h {
        if !g.has_edge(e) {
            return Err(OracleError::SpannerNotSubgraph(e));
        }
        // Duplicates in `h` are harmless.
        let _ = hg.insert_edge(e);
    }
    Ok(hg)
}

struct Balls {
    words: usize,
    /// `levels[r]` holds, row by row, the vertices within distance `r`.
    levels: Vec<Vec<u64>>,
}

impl Balls {
    fn new(h: &DynamicGraph, radius: usize) -> Self {
        let n = h.n();
        let words = n.div_ceil(64).max(1);
        let mut base = vec![0u64; n * words];
        for u in 0..n {
            base[u * words + u / 64] |= 1 << (u % 64);
        }
        let mut levels = vec![base];
        for _ in 0..radius {
            let prev = levels.last().unwrap();
            let mut next = prev.clone();
            for u in 0..n {
                for &x in h.neighbors(u) {
                    for w in 0..words {
                        next[u * words + w] |= prev[x * words + w];
                    }
                }
            }
            levels.push(next);
        }
        Self { words, levels }
    }

    fn row(&self, r: usize, u: VertexId) -> &[u64] {
        &self.levels[r][u * self.words..(u + 1) * self.words]
    }

    fn meet(&self, a: usize, u: VertexId, b: usize, v: VertexId) -> bool {
        self.row(a, u)
            .iter()
            .zip(self.row(b, v))
            .any(|(x, y)| x & y != 0)
    }

    /// Exact distance if it is at most `t`.
    fn distance(&self, u: VertexId, v: VertexId, t: usize) -> Option<usize> {
        (0..=t).find(|&d| self.meet(d.div_ceil(2), u, d / 2, v))
    }
}

fn exact_stretch(g: &DynamicGraph, h: &DynamicGraph, t: usize) -> StretchReport {
    let balls = Balls::new(h, t.div_ceil(2));
    let mut worst: Option<(Distance, EdgeKey)> = None;
    let mut ok = true;
    for e in g.edges() {
        let d = if h.has_edge(e) {
            Distance::Finite(1)
        } else {
            match balls.distance(e.lo(), e.hi(), t) {
                Some(d) => Distance::Finite(d),
                None => {
                    ok = false;
                    exact_distance(h, e.lo(), e.hi())
                }
            }
        };
        if worst.is_none_or(|(w, _)| d > w) {
            worst = Some((d, e));
        }
    }
    finish(ok, worst)
}

fn sampled_stretch(
    g: &DynamicGraph,
    h: &DynamicGraph,
    t: usize,
    count: usize,
    seed: u64,
) -> StretchReport {
    let edges: Vec<EdgeKey> = g.edges().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = index::sample(&mut rng, edges.len(), count.min(edges.len()));
    let mut scratch = BfsScratch::new(g.n());
    let mut worst: Option<(Distance, EdgeKey)> = None;
    let mut ok = true;
    for i in picks.into_iter() {
        let e = edges[i];
        let mut d = scratch.dist(h, e.lo(), e.hi(), t);
        if d == Distance::Unreachable {
            ok = false;
            d = exact_distance(h, e.lo(), e.hi());
        }
        if worst.is_none_or(|(w, we)| d > w || (d == w && e < we)) {
            worst = Some((d, e));
        }
    }
    finish(ok, worst)
}

fn finish(ok: bool, worst: Option<(Distance, EdgeKey)>) -> StretchReport {
    StretchReport {
        ok,
        worst_edge: worst.map(|(_, e)| e),
        worst_dist: worst.map_or(Distance::Finite(0), |(d, _)| d),
    }
}

fn exact_distance(h: &DynamicGraph, u: VertexId, v: VertexId) -> Distance {
    plain_bfs(h.n(), |x| h.neighbors(x).iter().copied().collect(), u)[v]
        .map_or(Distance::Unreachable, Distance::Finite)
}

/// Uncapped BFS distances from `src`.
fn plain_bfs<F>(n: usize, nbrs: F, src: VertexId) -> Vec<Option<usize>>
where
    F: Fn(VertexId) -> Vec<VertexId>,
{
    let mut dist = vec![None; n];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(x) = q.pop_front() {
        let d = dist[x].unwrap();
        for y in nbrs(x) {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                q.push_back(y);
            }
        }
    }
    dist
}

/// All-pairs variant of the stretch check: `dist_H(u,v) <= t * dist_G(u,v)`
/// for every connected pair. Quadratic; for cross-checking on small graphs.
pub fn all_pairs_stretch_ok<I>(g: &DynamicGraph, h: I, t: usize) -> Result<bool, OracleError>
where
    I: IntoIterator<Item = EdgeKey>,
{
    let hg = spanner_graph(g, h)?;
    let n = g.n();
    for u in 0..n {
        let dg = plain_bfs(n, |x| g.neighbors(x).iter().copied().collect(), u);
        let dh = plain_bfs(n, |x| hg.neighbors(x).iter().copied().collect(), u);
        for v in 0..n {
            if let Some(d) = dg[v] {
                match dh[v] {
                    Some(e) if e <= t * d => {}
                    _ => return Ok(false),
                }
            }
        }
    }
    Ok(true)
}

pub fn verify_size(h_len: usize, bound: usize) -> bool {
    h_len <= bound
}

/// Length of the shortest cycle of `(V, h)`, or `None` if it is a forest.
pub fn girth<I>(n: usize, h: I) -> Option<usize>
where
    I: IntoIterator<Item = EdgeKey>,
{
    let mut adj = vec![Vec::new(); n];
    for e in h {
        adj[e.lo()].push(e.hi());
        adj[e.hi()].push(e.lo());
    }
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        let mut q = VecDeque::from([root]);
        while let Some(x) = q.pop_front() {
            if best.is_some_and(|b| 2 * dist[x] >= b) {
                break;
            }
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    q.push_back(y);
                } else if parent[x] != y {
                    let len = dist[x] + dist[y] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

pub fn girth_at_least<I>(n: usize, h: I, g_min: usize) -> bool
where
    I: IntoIterator<Item = EdgeKey>,
{
    girth(n, h).is_none_or(|g| g >= g_min)
}

/// Classic greedy: inspect `order`, keep `(u,v)` iff `dist_H(u,v) >= 2k`.
pub fn reference_greedy(
    g: &DynamicGraph,
    k: usize,
    order: &[EdgeKey],
) -> Result<Vec<EdgeKey>, OracleError> {
    if order.len() != g.m() {
        return Err(OracleError::OrderNotPermutation(format!(
            "{} edges in order, {} in graph",
            order.len(),
            g.m()
        )));
    }
    let mut seen = HashSet::with_capacity(order.len());
    for &e in order {
        if !g.has_edge(e) {
            return Err(OracleError::OrderNotPermutation(format!("{e} not in graph")));
        }
        if !seen.insert(e) {
            return Err(OracleError::OrderNotPermutation(format!("{e} repeated")));
        }
    }
    let n = g.n();
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut kept = Vec::new();
    for &e in order {
        let (u, v) = e.endpoints();
        let d = plain_bfs(n, |x| adj[x].clone(), u)[v];
        if d.is_none_or(|d| d >= 2 * k) {
            adj[u].push(v);
            adj[v].push(u);
            kept.push(e);
        }
    }
    Ok(kept)
}

/// `reference_greedy` over ascending `EdgeKey` order, as a set.
pub fn reference_greedy_sorted(g: &DynamicGraph, k: usize) -> BTreeSet<EdgeKey> {
    let order: Vec<EdgeKey> = g.edges().collect();
    reference_greedy(g, k, &order)
        .expect("ascending edge list is a permutation")
        .into_iter()
        .collect()
}
