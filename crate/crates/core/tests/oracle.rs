use std::collections::BTreeSet;

use dynspan::oracle::{girth, girth_at_least, reference_greedy_sorted, verify_stretch, CheckMode, OracleError};
use dynspan::{DynamicGraph, EdgeKey};
use proptest::prelude::*;

mod common;
use common::e;

fn arb_graph(max_n: usize) -> impl Strategy<Value = DynamicGraph> {
    (3usize..max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..(n * 3)).prop_map(move |pairs| {
            let mut g = DynamicGraph::empty(n);
            for (a, b) in pairs {
                if a != b {
                    let _ = g.insert_edge(EdgeKey::of(a, b));
                }
            }
            g
        })
    })
}

proptest! {
    #[test]
    fn stretch_check_agrees_with_floyd(g in arb_graph(11), mask in any::<u64>(), t in 1usize..6) {
        let h: BTreeSet<EdgeKey> = g
            .edges()
            .enumerate()
            .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
            .map(|(_, e)| e)
            .collect();
        let r = verify_stretch(&g, h.iter().copied(), t, CheckMode::Exact).unwrap();
        prop_assert_eq!(r.ok, common::is_spanner(&g, &h, t));
    }

    #[test]
    fn girth_agrees_with_brute_force(g in arb_graph(10)) {
        let h: BTreeSet<EdgeKey> = g.edges().collect();
        prop_assert_eq!(girth(g.n(), h.iter().copied()), common::brute_girth(g.n(), &h));
    }

    #[test]
    fn reference_greedy_is_a_spanner_with_high_girth(g in arb_graph(11), k in 1usize..4) {
        let h = reference_greedy_sorted(&g, k);
        prop_assert!(common::is_spanner(&g, &h, 2 * k - 1));
        prop_assert!(girth_at_least(g.n(), h.iter().copied(), 2 * k + 1));
    }
}

#[test]
fn petersen_girth_is_five() {
    let outer = (0..5).map(|i| e(i, (i + 1) % 5));
    let spokes = (0..5).map(|i| e(i, i + 5));
    let inner = (0..5).map(|i| e(5 + i, 5 + (i + 2) % 5));
    let h: Vec<EdgeKey> = outer.chain(spokes).chain(inner).collect();
    assert_eq!(girth(10, h.iter().copied()), Some(5));
    assert!(girth_at_least(10, h.iter().copied(), 5));
    assert!(!girth_at_least(10, h, 6));
}

#[test]
fn non_subgraph_is_rejected() {
    let g = DynamicGraph::from_pairs(3, [(0, 1)]).unwrap();
    assert_eq!(
        verify_stretch(&g, [e(1, 2)], 3, CheckMode::Exact),
        Err(OracleError::SpannerNotSubgraph(e(1, 2)))
    );
}

#[test]
fn sampled_mode_finds_the_only_bad_edge_when_sampling_everything() {
    let g = DynamicGraph::from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
    let h = [e(0, 1), e(1, 2), e(2, 3)];
    let r = verify_stretch(&g, h, 2, CheckMode::Sampled { count: 100, seed: 1 }).unwrap();
    assert!(!r.ok);
    assert_eq!(r.worst_edge, Some(e(0, 3)));
    assert!(verify_stretch(&g, h, 3, CheckMode::Sampled { count: 100, seed: 1 }).unwrap().ok);
}
