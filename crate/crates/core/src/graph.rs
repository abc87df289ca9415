//! Fixed-vertex-set dynamic graph.
//!
//! Adjacency is kept as one ordered set per vertex, so every neighbour
//! lookup, insertion and removal is a single logarithmic set operation. The
//! vertex set never changes after construction; only edges come and go.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Index of a vertex in `[0, n)`.
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeKey),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("edge {0} already present")]
    EdgeExists(EdgeKey),
    #[error("edge {0} not present")]
    EdgeMissing(EdgeKey),
}

/// Line-oriented parse failure shared by all the text formats in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Canonical undirected edge: `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    lo: VertexId,
    hi: VertexId,
}

impl EdgeKey {
    pub fn new(u: VertexId, v: VertexId) -> Result<Self, GraphError> {
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Ok(Self { lo: u, hi: v }),
            std::cmp::Ordering::Greater => Ok(Self { lo: v, hi: u }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(u)),
        }
    }

    /// Panics on a self-loop. Meant for literals in tests and for endpoints
    /// that are already known to differ.
    pub fn of(u: VertexId, v: VertexId) -> Self {
        Self::new(u, v).expect("self-loop passed to EdgeKey::of")
    }

    pub fn lo(self) -> VertexId {
        self.lo
    }

    pub fn hi(self) -> VertexId {
        self.hi
    }

    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.lo, self.hi)
    }

    /// The endpoint that is not `x`. `x` must be an endpoint.
    pub fn other(self, x: VertexId) -> VertexId {
        debug_assert!(x == self.lo || x == self.hi);
        if x == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UpdateEvent {
    pub seq: u64,
    pub kind: UpdateKind,
    pub edge: EdgeKey,
}

impl UpdateEvent {
    pub fn insert(seq: u64, edge: EdgeKey) -> Self {
        Self {
            seq,
            kind: UpdateKind::Insert,
            edge,
        }
    }

    pub fn delete(seq: u64, edge: EdgeKey) -> Self {
        Self {
            seq,
            kind: UpdateKind::Delete,
            edge,
        }
    }
}

impl fmt::Display for UpdateEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.kind {
            UpdateKind::Insert => '+',
            UpdateKind::Delete => '-',
        };
        write!(f, "{} {} {}", sign, self.edge.lo, self.edge.hi)
    }
}

/// Hop distance; `Unreachable` sorts after every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }

    pub fn within(self, bound: usize) -> bool {
        matches!(self, Distance::Finite(d) if d <= bound)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Unreachable => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DynamicGraph {
    adj: Vec<BTreeSet<VertexId>>,
    m: usize,
}

impl DynamicGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); n],
            m: 0,
        }
    }

    pub fn new(n: usize, edges: impl IntoIterator<Item = EdgeKey>) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for e in edges {
            g.check_edge(e)?;
            if g.has_edge(e) {
                return Err(GraphError::DuplicateEdge(e));
            }
            g.link(e);
        }
        Ok(g)
    }

    /// Builds from raw endpoint pairs, rejecting self-loops.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let edges = pairs
            .into_iter()
            .map(|(u, v)| EdgeKey::new(u, v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn neighbors(&self, u: VertexId) -> &BTreeSet<VertexId> {
        &self.adj[u]
    }

    pub fn has_edge(&self, e: EdgeKey) -> bool {
        e.hi < self.n() && self.adj[e.lo].contains(&e.hi)
    }

    pub fn contains(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n() && self.adj[u].contains(&v)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            })
        }
    }

    pub fn check_edge(&self, e: EdgeKey) -> Result<(), GraphError> {
        self.check_vertex(e.hi)
    }

    pub fn insert_edge(&mut self, e: EdgeKey) -> Result<(), GraphError> {
        self.check_edge(e)?;
        if self.has_edge(e) {
            return Err(GraphError::EdgeExists(e));
        }
        self.link(e);
        Ok(())
    }

    pub fn delete_edge(&mut self, e: EdgeKey) -> Result<(), GraphError> {
        self.check_edge(e)?;
        if !self.adj[e.lo].remove(&e.hi) {
            return Err(GraphError::EdgeMissing(e));
        }
        let removed = self.adj[e.hi].remove(&e.lo);
        debug_assert!(removed, "asymmetric adjacency at {e}");
        self.m -= 1;
        Ok(())
    }

    pub fn apply(&mut self, ev: &UpdateEvent) -> Result<(), GraphError> {
        match ev.kind {
            UpdateKind::Insert => self.insert_edge(ev.edge),
            UpdateKind::Delete => self.delete_edge(ev.edge),
        }
    }

    fn link(&mut self, e: EdgeKey) {
        let a = self.adj[e.lo].insert(e.hi);
        let b = self.adj[e.hi].insert(e.lo);
        debug_assert!(a && b, "asymmetric adjacency at {e}");
        self.m += 1;
    }

    /// All edges in ascending `EdgeKey` order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.range(u + 1..).map(move |&v| EdgeKey { lo: u, hi: v })
        })
    }

    /// Hop distance from `u` to `v` if it is at most `cap`.
    pub fn bfs_dist(&self, u: VertexId, v: VertexId, cap: usize) -> Distance {
        BfsScratch::new(self.n()).dist(self, u, v, cap)
    }

    /// Full symmetry and edge-count audit; O(n + m).
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut half_degrees = 0usize;
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if v >= self.n() || !self.adj[v].contains(&u) {
                    return Err(format!("asymmetric adjacency {u} -> {v}"));
                }
            }
            half_degrees += nbrs.len();
        }
        if half_degrees != 2 * self.m {
            return Err(format!(
                "edge count {} disagrees with degree sum {half_degrees}",
                self.m
            ));
        }
        Ok(())
    }

    /// `N <n>` followed by one `<lo> <hi>` line per edge in ascending order.
    pub fn to_canonical(&self) -> String {
        let mut out = format!("N {}\n", self.n());
        for e in self.edges() {
            out.push_str(&format!("{} {}\n", e.lo, e.hi));
        }
        out
    }

    pub fn from_canonical(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, "missing `N <n>` header"))?;
        let n = parse_header(hline, header)?;
        let mut g = Self::empty(n);
        for (line, text) in lines {
            let mut it = text.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (parse_num(line, a)?, parse_num(line, b)?),
                _ => return Err(ParseError::new(line, "expected `<u> <v>`")),
            };
            let e = EdgeKey::new(u, v).map_err(|err| ParseError::new(line, err.to_string()))?;
            g.insert_edge(e).map_err(|err| match err {
                GraphError::EdgeExists(e) => {
                    ParseError::new(line, GraphError::DuplicateEdge(e).to_string())
                }
                other => ParseError::new(line, other.to_string()),
            })?;
        }
        Ok(g)
    }
}

impl FromStr for DynamicGraph {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_canonical(s)
    }
}

pub(crate) fn parse_header(line: usize, text: &str) -> Result<usize, ParseError> {
    let mut it = text.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some("N"), Some(n), None) => parse_num(line, n),
        _ => Err(ParseError::new(line, "expected header `N <n>`")),
    }
}

pub(crate) fn parse_num<T: FromStr>(line: usize, text: &str) -> Result<T, ParseError> {
    text.parse()
        .map_err(|_| ParseError::new(line, format!("invalid number `{text}`")))
}

/// Reusable state for depth-capped breadth-first searches.
///
/// Uses generation stamps so a search only pays for the vertices it visits.
#[derive(Debug, Clone)]
pub struct BfsScratch {
    stamp: Vec<u32>,
    depth: Vec<u32>,
    generation: u32,
    queue: VecDeque<VertexId>,
    last_work: usize,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            depth: vec![0; n],
            generation: 0,
            queue: VecDeque::new(),
            last_work: 0,
        }
    }

    fn next_generation(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.depth.resize(n, 0);
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.queue.clear();
        self.last_work = 0;
    }

    /// Number of vertices dequeued by the most recent search.
    pub fn last_work(&self) -> usize {
        self.last_work
    }

    pub fn dist(&mut self, g: &DynamicGraph, u: VertexId, v: VertexId, cap: usize) -> Distance {
        if u == v {
            return Distance::Finite(0);
        }
        self.next_generation(g.n());
        let gen = self.generation;
        self.stamp[u] = gen;
        self.depth[u] = 0;
        self.queue.push_back(u);
        while let Some(x) = self.queue.pop_front() {
            self.last_work += 1;
            let d = self.depth[x] as usize;
            if d >= cap {
                continue;
            }
            for &y in g.neighbors(x) {
                if self.stamp[y] == gen {
                    continue;
                }
                if y == v {
                    return Distance::Finite(d + 1);
                }
                self.stamp[y] = gen;
                self.depth[y] = (d + 1) as u32;
                self.queue.push_back(y);
            }
        }
        Distance::Unreachable
    }
}
