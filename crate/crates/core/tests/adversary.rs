mod common;

use common::inputs_from;
use linkcons::adversary::generators::{gen_clique, gen_regular_parts};
use linkcons::adversary::{crash_decide, LazyParts};
use linkcons::engine::{run_to_completion, MessageEnvelope, Scenario};
use linkcons::{AdversarySpec, AdversaryVerdict, AlgorithmSpec, CrashSchedule, Link, NodeId, Payload};

fn envelope(a: u32, b: u32, round: u64) -> MessageEnvelope {
    MessageEnvelope {
        link: Link::new(NodeId(a), NodeId(b)).unwrap(),
        from: NodeId(a),
        to: NodeId(b),
        round,
        bit_size: 9,
        payload: Payload::Decision { value: 1 },
    }
}

#[test]
fn crash_takes_effect_at_its_round() {
    let mut s = CrashSchedule::new();
    s.add(3, Link::new(NodeId(0), NodeId(1)).unwrap());
    assert_eq!(crash_decide(&s, &envelope(0, 1, 2), 2), AdversaryVerdict::Deliver);
    assert_eq!(crash_decide(&s, &envelope(0, 1, 3), 3), AdversaryVerdict::Drop);
    assert_eq!(crash_decide(&s, &envelope(1, 0, 7), 7), AdversaryVerdict::Drop);
    assert_eq!(crash_decide(&s, &envelope(1, 2, 7), 7), AdversaryVerdict::Deliver);
}

#[test]
fn empty_schedule_matches_failure_free_run() {
    let base = Scenario::new(
        gen_clique(5).unwrap(),
        inputs_from(&[(0, 3), (1, 9), (2, 1), (3, 4), (4, 4)]),
        AlgorithmSpec::Es,
    );
    let a = run_to_completion(&base).unwrap();
    let b = run_to_completion(&base.clone().with_adversary(AdversarySpec::CrashSchedule {
        schedule: CrashSchedule::new(),
    }))
    .unwrap();
    assert_eq!(a.rounds, b.rounds);
    assert_eq!(a.decisions, b.decisions);
}

#[test]
fn lazy_drops_while_other_cross_links_remain() {
    // 12 nodes, 36 links: parts of six, each node of degree 5 with one cross link
    let mut g = gen_regular_parts(12, 36).unwrap();
    let mut lazy = LazyParts::new(&g).unwrap();
    let p = NodeId(0);
    for port in 0..4 {
        let (l, v, made) = lazy.decide(&mut g, p, port, 1).unwrap();
        assert_eq!(v, AdversaryVerdict::Deliver);
        assert!(!lazy.is_cross(&l));
        assert!(!made.is_empty());
    }
    let (l, v, _) = lazy.decide(&mut g, p, 4, 2).unwrap();
    assert!(lazy.is_cross(&l));
    assert_eq!(v, AdversaryVerdict::Drop);
    assert_eq!(lazy.unused_cross(), 5);
}

#[test]
fn lazy_delivers_the_last_cross_link() {
    let mut g = gen_regular_parts(12, 36).unwrap();
    let mut lazy = LazyParts::new(&g).unwrap();
    let mut round = 1;
    for node in 0..6 {
        for port in 0..5 {
            let (l, v, _) = lazy.decide(&mut g, NodeId(node), port, round).unwrap();
            if lazy.is_cross(&l) {
                if node < 5 {
                    assert_eq!(v, AdversaryVerdict::Drop, "node {node}");
                    g.fail_link(l).unwrap();
                } else {
                    assert_eq!(lazy.unused_cross(), 0);
                    assert_eq!(v, AdversaryVerdict::Deliver);
                    assert_eq!(lazy.first_cross_delivery(), Some(round));
                }
            }
            round += 1;
        }
    }
    assert!(g.is_connected());
}

#[test]
fn generator_shapes() {
    use linkcons::adversary::generators::{gen_cycle_multi, gen_join, regular_parts_degree};
    for (n, m) in [(12, 36), (16, 48), (20, 50)] {
        let g = gen_regular_parts(n, m).unwrap();
        let d = regular_parts_degree(n, m) as usize;
        assert!(g.nodes().iter().all(|&v| g.degree(v) == d + 1));
        assert_eq!(g.link_count(), n as usize * d / 2 + n as usize / 2);
    }
    for (h, d) in [(1, 0), (3, 1), (4, 2), (6, 3)] {
        let g = gen_join(h, d).unwrap();
        let cross = g.links().iter().filter(|l| (l.lo().0 < h) != (l.hi().0 < h)).count();
        assert_eq!(cross, (h * h) as usize);
        let (nodes, edges) = common::reliable_edges(&g);
        let half: std::collections::BTreeSet<u32> = (0..h).collect();
        let inside = edges
            .iter()
            .filter(|(a, b)| half.contains(a) && half.contains(b))
            .copied()
            .collect();
        assert_eq!(common::oracle_diameter(&half, &inside), Some(d as usize));
        assert!(common::oracle_diameter(&nodes, &edges).unwrap() <= 2 * d as usize + 1);
    }
    for (x, d) in [(1, 2), (3, 2), (4, 5)] {
        let g = gen_cycle_multi(x, d).unwrap();
        assert_eq!(g.node_count() as u32, 2 * d + x - 1);
        assert_eq!(g.whole_diameter(), Some(d as usize));
    }
    assert!(gen_cycle_multi(2, 1).is_err());
}
