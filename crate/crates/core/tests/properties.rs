mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{fuzz_case, max_diameter_by_edge_addition, oracle_components, oracle_diameter, reliable_edges};
use linkcons::adversary::generators::{gen_join, gen_random_connected, gen_regular_parts};
use linkcons::adversary::LazyParts;
use linkcons::checker::check_agreement;
use linkcons::engine::{from_lines, run_to_completion, stretch_sequence, to_lines, Scenario};
use linkcons::{AdversarySpec, AdversaryVerdict, AlgorithmSpec, DynamicGraph, Link, NodeId, Payload};
use proptest::prelude::*;

fn graph_and_failures() -> impl Strategy<Value = (DynamicGraph, Vec<usize>)> {
    (
        1u32..=7,
        0u32..=6,
        any::<u64>(),
        prop::collection::vec(any::<usize>(), 0..10),
    )
        .prop_map(|(n, extra, seed, picks)| {
            let max_extra = (n * n.saturating_sub(1) / 2).saturating_sub(n - 1);
            let g = gen_random_connected(n, extra.min(max_extra), seed).unwrap();
            (g, picks)
        })
}

fn nth_link(g: &DynamicGraph, i: usize) -> Option<Link> {
    let links: Vec<Link> = g.links().iter().copied().collect();
    (!links.is_empty()).then(|| links[i % links.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stretch_never_decreases((mut g, picks) in graph_and_failures()) {
        let mut prev = g.stretch();
        for p in picks {
            let Some(l) = nth_link(&g, p) else { break };
            g.fail_link(l).unwrap();
            let s = g.stretch();
            prop_assert!(s >= prev, "stretch fell from {} to {}", prev, s);
            prev = s;
        }
    }

    #[test]
    fn structure_matches_bfs_oracle((mut g, picks) in graph_and_failures()) {
        for p in picks.iter().take(4) {
            if let Some(l) = nth_link(&g, *p) {
                g.fail_link(l).unwrap();
            }
        }
        let (nodes, edges) = reliable_edges(&g);
        let comps: BTreeSet<BTreeSet<u32>> = oracle_components(&nodes, &edges).into_iter().collect();
        let ours: BTreeSet<BTreeSet<u32>> = g
            .connected_components()
            .into_iter()
            .map(|c| c.into_iter().map(|n| n.0).collect())
            .collect();
        prop_assert_eq!(&ours, &comps);
        for c in g.connected_components() {
            let sub_nodes: BTreeSet<u32> = c.iter().map(|n| n.0).collect();
            let sub_edges = edges.iter().filter(|(a, _)| sub_nodes.contains(a)).copied().collect();
            prop_assert_eq!(Some(g.diameter(&c).unwrap()), oracle_diameter(&sub_nodes, &sub_edges));
        }
        prop_assert_eq!(g.stretch(), max_diameter_by_edge_addition(&nodes, &edges));
        for &u in &nodes {
            for &v in &nodes {
                let same = comps.iter().any(|c| c.contains(&u) && c.contains(&v));
                prop_assert_eq!(g.reliable_path_exists(NodeId(u), NodeId(v)).unwrap(), same);
            }
        }
    }

    #[test]
    fn lazy_bindings_are_consistent(n in (5u32..=8).prop_map(|h| 2 * h), sends in prop::collection::vec((any::<u32>(), any::<usize>()), 1..60)) {
        let m = 3 * n;
        let mut g = gen_regular_parts(n, m).unwrap();
        let links = g.links().clone();
        let mut lazy = LazyParts::new(&g).unwrap();
        let mut committed: BTreeMap<NodeId, BTreeMap<usize, NodeId>> = BTreeMap::new();
        for (round, (who, port)) in sends.into_iter().enumerate() {
            let node = NodeId(who % n);
            let port = port % g.degree(node);
            let (link, verdict, made) = lazy.decide(&mut g, node, port, round as u64 + 1).unwrap();
            prop_assert_eq!(g.link_at(node, port), Some(link));
            if verdict == AdversaryVerdict::Drop {
                prop_assert!(lazy.is_cross(&link));
                g.fail_link(link).unwrap();
            }
            for c in made {
                let slots = committed.entry(c.node).or_default();
                prop_assert!(!slots.contains_key(&c.port), "port {} of {} bound twice", c.port, c.node);
                prop_assert!(!slots.values().any(|&q| q == c.neighbor), "{} committed to {} twice", c.node, c.neighbor);
                slots.insert(c.port, c.neighbor);
            }
            // bound ports keep their neighbor
            for (&v, slots) in &committed {
                for (&p, &q) in slots {
                    prop_assert_eq!(g.link_at(v, p).and_then(|l| l.other(v)), Some(q));
                }
            }
        }
        prop_assert_eq!(g.links(), &links);
        prop_assert!(g.is_connected());
    }

    #[test]
    fn cut_keeps_join_connected(h in 1u32..=4, d in 0u32..=3, alg in 0usize..5) {
        let d = if h == 1 { 0 } else { d.clamp(1, h - 1) };
        let g = gen_join(h, d).unwrap();
        let n = g.node_count() as u32;
        let inputs = g.nodes().iter().map(|&v| (v, u64::from(v.0) * 11 % 7)).collect();
        let algorithm = [AlgorithmSpec::Fast { lambda: u64::from(n) }, AlgorithmSpec::Sm, AlgorithmSpec::Lm, AlgorithmSpec::Es, AlgorithmSpec::Ol][alg];
        let sc = Scenario::new(g, inputs, algorithm).with_adversary(AdversarySpec::BipartiteCut { part: None });
        let t = run_to_completion(&sc).unwrap();
        let half = |v: NodeId| v.0 < h;
        for r in &t.rounds {
            prop_assert!(t.graph_at(r.round).is_connected());
            for e in r.dropped_envelopes() {
                prop_assert!(half(e.link.lo()) != half(e.link.hi()));
            }
        }
        prop_assert!(check_agreement(&t).is_empty());
    }

    #[test]
    fn crashed_links_stay_down(seed in 0u64..5000) {
        let case = fuzz_case(seed);
        let t = common::run(&case, AlgorithmSpec::Es);
        let mut down: BTreeMap<Link, u64> = BTreeMap::new();
        for r in &t.rounds {
            for e in r.dropped_envelopes() {
                down.entry(e.link).or_insert(r.round);
            }
            for e in r.delivered_envelopes() {
                prop_assert!(!down.contains_key(&e.link), "{} delivered after dropping", e.link);
            }
        }
        let s = stretch_sequence(&t);
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn payloads_stay_within_size_caps(seed in 0u64..5000) {
        let case = fuzz_case(seed);
        let n = case.graph.node_count();
        let m = case.graph.link_count();
        for alg in [AlgorithmSpec::Sm, AlgorithmSpec::Lm, AlgorithmSpec::Es, AlgorithmSpec::Ol] {
            let t = common::run(&case, alg);
            for e in t.envelopes() {
                match &e.payload {
                    Payload::Probe { timestamps, .. } => prop_assert!(timestamps.len() <= n),
                    Payload::Snapshot { nodes, links, unreliable, inputs } => {
                        prop_assert!(nodes.len() <= n && inputs.len() <= n);
                        prop_assert!(links.len() <= m && unreliable.len() <= m);
                    }
                    Payload::States { entries } => prop_assert!(entries.len() <= n),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn ol_link_categories_only_advance(seed in 0u64..5000) {
        let case = fuzz_case(seed);
        let t = common::run(&case, AlgorithmSpec::Ol);
        // 0 passive, 1 active, 2 unreliable, as announced by each node itself
        let mut last: BTreeMap<(NodeId, NodeId), u8> = BTreeMap::new();
        for e in t.envelopes() {
            let Payload::States { entries } = &e.payload else { continue };
            let own = entries.iter().find(|s| s.state.name == e.from).unwrap();
            let st = &own.state;
            for (set, level) in [(&st.passive, 0u8), (&st.active, 1), (&st.unreliable, 2)] {
                for &q in set {
                    let prev = last.insert((e.from, q), level).unwrap_or(0);
                    prop_assert!(level >= prev, "{} moved link to {} backwards", e.from, q);
                }
            }
        }
    }

    #[test]
    fn fuzz_traces_round_trip(seed in 0u64..5000, alg in 0usize..5) {
        let case = fuzz_case(seed);
        let name = common::ALGORITHMS[alg];
        let t = common::run(&case, common::algorithm_for(name, &case));
        let text = to_lines(&t);
        prop_assert_eq!(from_lines(&text).unwrap(), t);
    }
}
