use std::collections::BTreeSet;

use dynspan::fully_dynamic::FullyDynamicGreedy;
use dynspan::oracle::{verify_stretch, CheckMode};
use dynspan::spanner::{diff, DynamicSpanner, SpannerView};
use dynspan::{EdgeKey, UpdateEvent};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

fn run(n: usize, k: usize, steps: usize, p_insert: f64, seed: u64) -> FullyDynamicGreedy {
    let mut s = FullyDynamicGreedy::new(n, k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for step in 0..steps {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            continue;
        }
        let e = EdgeKey::of(a, b);
        let before: BTreeSet<EdgeKey> = s.spanner_edges().into_iter().collect();
        let ev = if s.graph().has_edge(e) {
            if rng.gen_bool(p_insert) {
                continue;
            }
            UpdateEvent::delete(step as u64, e)
        } else {
            UpdateEvent::insert(step as u64, e)
        };
        let delta = s.apply(&ev).unwrap();
        let after: BTreeSet<EdgeKey> = s.spanner_edges().into_iter().collect();
        assert_eq!(delta, diff(&before, &after), "step {step}");
        let r = verify_stretch(s.graph(), after, 2 * k - 1, CheckMode::Exact).unwrap();
        assert!(r.ok, "step {step}: stretch violated at {:?}", r.worst_edge);
        if step % 25 == 0 {
            s.check_invariants().unwrap();
        }
    }
    s.check_invariants().unwrap();
    s
}

#[test]
fn mixed_updates_keep_stretch() {
    for (k, seed) in [(2, 1), (3, 2), (1, 3)] {
        let s = run(20, k, 1500, 0.3, seed);
        assert!(s.counter() > 0);
    }
}

#[test]
fn counter_reaches_the_top_level() {
    // 16 vertices, k = 2: levels merge at counts divisible by 2^7.
    let s = run(16, 2, 4000, 0.5, 9);
    assert!(s.counter() >= 128);
    assert!((1..=s.top()).any(|i| s.level(i).is_some()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn arbitrary_streams(n in 3usize..10, k in 1usize..4, ops in prop::collection::vec((0usize..10, 0usize..10), 1..150)) {
        let mut s = FullyDynamicGreedy::new(n, k).unwrap();
        for (a, b) in ops {
            let (a, b) = (a % n, b % n);
            if a == b {
                continue;
            }
            let e = EdgeKey::of(a, b);
            if s.graph().has_edge(e) {
                s.delete(e).unwrap();
            } else {
                s.insert(e).unwrap();
            }
            let h: BTreeSet<EdgeKey> = s.spanner_edges().into_iter().collect();
            prop_assert!(common::is_spanner(s.graph(), &h, 2 * k - 1));
            s.check_invariants().unwrap();
        }
    }
}
