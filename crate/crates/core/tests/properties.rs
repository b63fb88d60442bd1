use std::collections::BTreeSet;

use cggpack::graph::{Graph, Host, Order};
use cggpack::obstruction::{coverage_upper_bound, max_copy_total_length};
use cggpack::packing::{greedy_maximal_packing, nibble_matching, verify_packing, CopyHypergraph, Packing};
use proptest::prelude::*;

fn arb_cgg(max_k: usize) -> impl Strategy<Value = Graph> {
    (2..=max_k)
        .prop_flat_map(|k| {
            let pairs: Vec<(usize, usize)> = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (Just(k), Just(pairs), proptest::collection::vec(any::<bool>(), m))
        })
        .prop_filter_map("needs an edge", |(k, pairs, keep)| {
            let edges: Vec<_> = pairs.into_iter().zip(keep).filter(|(_, b)| *b).map(|(e, _)| e).collect();
            (!edges.is_empty()).then(|| Graph::cgg(k, edges).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_never_beats_the_bound(g in arb_cgg(5), half in 3usize..16, seed in 0u64..1000) {
        let n = 2 * half + 1;
        let p = greedy_maximal_packing(&g, &Host::complete(Order::Cyclic, n), seed).unwrap();
        prop_assert!(verify_packing(&p).ok());
        let b = coverage_upper_bound(&g, n, None).unwrap();
        prop_assert!(p.coverage() <= b.bound, "{} > {}", p.coverage(), b.bound);
    }

    #[test]
    fn copies_respect_max_length(g in arb_cgg(5), half in 3usize..12, seed in 0u64..1000) {
        let n = 2 * half + 1;
        let (l, _) = max_copy_total_length(&g, n, None).unwrap();
        let p = greedy_maximal_packing(&g, &Host::complete(Order::Cyclic, n), seed).unwrap();
        for copy in p.copies() {
            let total: u64 = g.edges().map(|(a, b)| {
                let d = copy[a].abs_diff(copy[b]) as u64;
                d.min(n as u64 - d)
            }).sum();
            prop_assert!(total <= l);
        }
    }

    #[test]
    fn json_round_trips(g in arb_cgg(6), half in 3usize..10, seed in 0u64..100) {
        let text = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let p = greedy_maximal_packing(&g, &Host::complete(Order::Cyclic, 2 * half + 1), seed).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: Packing = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn nibble_selects_a_maximal_matching(
        edges in proptest::collection::vec(proptest::collection::btree_set(0u64..60, 3), 1..150),
        seed in 0u64..1000,
    ) {
        let hs: Vec<Vec<u64>> = edges.iter().map(|s| s.iter().copied().collect()).collect();
        let hg = CopyHypergraph::from_hyperedges(60, 3, &hs).unwrap();
        let (sel, _) = nibble_matching(&hg, 0.1, seed);
        let mut used = BTreeSet::new();
        for &i in &sel {
            for &v in hg.hyperedge(i) {
                prop_assert!(used.insert(v), "vertex {} reused", v);
            }
        }
        for i in 0..hg.len() {
            prop_assert!(sel.contains(&i) || hg.hyperedge(i).iter().any(|v| used.contains(v)));
        }
    }
}
