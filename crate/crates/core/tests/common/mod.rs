//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dynspan::{DynamicGraph, EdgeKey};

pub const INF: usize = usize::MAX / 4;

/// All-pairs hop distances by Floyd-Warshall over an edge list.
pub fn floyd(n: usize, edges: impl IntoIterator<Item = EdgeKey>) -> Vec<Vec<usize>> {
    let mut d = vec![vec![INF; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in edges {
        let (u, v) = e.endpoints();
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// `d_H(u, v) <= t * d_G(u, v)` for every pair, by brute force.
pub fn is_spanner(g: &DynamicGraph, h: &BTreeSet<EdgeKey>, t: usize) -> bool {
    let n = g.n();
    if h.iter().any(|&e| !g.has_edge(e)) {
        return false;
    }
    let dg = floyd(n, g.edges());
    let dh = floyd(n, h.iter().copied());
    (0..n).all(|u| (0..n).all(|v| dg[u][v] == INF || dh[u][v] <= t * dg[u][v]))
}

/// Shortest cycle length by removing each edge and measuring the detour.
pub fn brute_girth(n: usize, h: &BTreeSet<EdgeKey>) -> Option<usize> {
    let mut best = None;
    for &e in h {
        let rest = h.iter().copied().filter(|&f| f != e);
        let d = floyd(n, rest)[e.lo()][e.hi()];
        if d < INF {
            let len = d + 1;
            best = Some(best.map_or(len, |b: usize| b.min(len)));
        }
    }
    best
}

pub fn e(u: usize, v: usize) -> EdgeKey {
    EdgeKey::of(u, v)
}
