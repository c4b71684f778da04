mod common;

use common::{fuzz_case, inputs_from};
use linkcons::adversary::generators::{gen_clique, gen_path};
use linkcons::checker::{
    check_agreement, check_stretch_monotone, check_termination, check_trace_stretch_monotone, check_validity,
    message_bit_stats, verify,
};
use linkcons::engine::{run_to_completion, ExecutionTrace, Scenario};
use linkcons::{AdversarySpec, AlgorithmSpec, BoundProfile, CrashSchedule, Link, NodeId, ViolationKind};

fn trace(alg: AlgorithmSpec, inputs: &[(u32, u64)]) -> ExecutionTrace {
    let n = inputs.len() as u32;
    run_to_completion(&Scenario::new(gen_clique(n).unwrap(), inputs_from(inputs), alg)).unwrap()
}

#[test]
fn equal_inputs_admit_only_that_value() {
    let mut t = trace(AlgorithmSpec::Sm, &[(0, 4), (1, 4), (2, 4)]);
    assert!(check_validity(&t).is_empty());
    t.decisions.get_mut(&NodeId(1)).unwrap().value = 5;
    let v = check_validity(&t);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].kind, ViolationKind::Validity);
    assert_eq!(v[0].nodes, [NodeId(1)].into());
}

#[test]
fn healthy_fast_trace_verifies_clean() {
    let t = trace(AlgorithmSpec::Fast { lambda: 1 }, &[(0, 1), (1, 7), (2, 3), (3, 2)]);
    assert_eq!(verify(&t, BoundProfile::Fast).unwrap(), vec![]);
}

#[test]
fn doctored_decision_is_one_validity_violation() {
    let mut t = trace(AlgorithmSpec::Fast { lambda: 1 }, &[(0, 1), (1, 7), (2, 3)]);
    for d in t.decisions.values_mut() {
        d.value += 1;
    }
    let v = check_validity(&t);
    assert_eq!(v.len(), 3);
    let mut t = trace(AlgorithmSpec::Fast { lambda: 1 }, &[(0, 1), (1, 7), (2, 3)]);
    t.decisions.get_mut(&NodeId(2)).unwrap().value = 8;
    assert_eq!(check_validity(&t).len(), 1);
}

#[test]
fn separated_nodes_may_disagree() {
    let mut schedule = CrashSchedule::new();
    schedule.add(1, Link::new(NodeId(0), NodeId(1)).unwrap());
    let sc = Scenario::new(gen_path(2).unwrap(), inputs_from(&[(0, 5), (1, 7)]), AlgorithmSpec::Sm)
        .with_adversary(AdversarySpec::CrashSchedule { schedule });
    let t = run_to_completion(&sc).unwrap();
    assert_ne!(t.decisions[&NodeId(0)].value, t.decisions[&NodeId(1)].value);
    assert!(check_agreement(&t).is_empty());
}

#[test]
fn neighbors_on_a_sound_link_must_agree() {
    let mut t = trace(AlgorithmSpec::Sm, &[(0, 5), (1, 7)]);
    t.decisions.get_mut(&NodeId(0)).unwrap().value = 5;
    let v = check_agreement(&t);
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| x.kind == ViolationKind::Agreement));
}

#[test]
fn es_meets_its_bound_on_fuzz_cases() {
    for seed in 0..50 {
        let case = fuzz_case(seed);
        let t = common::run(&case, AlgorithmSpec::Es);
        assert_eq!(verify(&t, BoundProfile::Es).unwrap(), vec![], "seed {seed}");
    }
}

#[test]
fn timeout_is_a_termination_violation() {
    let sc = Scenario::new(
        gen_path(6).unwrap(),
        (0..6).map(|i| (NodeId(i), u64::from(i))).collect(),
        AlgorithmSpec::Es,
    )
    .with_round_limit(2);
    let t = run_to_completion(&sc).unwrap();
    let v = check_termination(&t, 100).unwrap();
    assert_eq!(v.kind, ViolationKind::Termination);
}

#[test]
fn late_decisions_break_the_bound() {
    let t = trace(AlgorithmSpec::Sm, &[(0, 5), (1, 7)]);
    assert!(check_termination(&t, 3).is_none());
    assert!(check_termination(&t, 2).is_some());
}

#[test]
fn stretch_sequences() {
    assert!(check_stretch_monotone(&[3, 2]).is_some());
    assert!(check_stretch_monotone(&[2, 2, 2]).is_none());
    assert!(check_stretch_monotone(&[]).is_none());
    let t = trace(AlgorithmSpec::Es, &[(0, 1), (1, 2), (2, 3)]);
    assert!(check_trace_stretch_monotone(&t).is_none());
}

#[test]
fn fast_profile_needs_a_fast_trace() {
    let t = trace(AlgorithmSpec::Sm, &[(0, 5), (1, 7)]);
    assert!(BoundProfile::Fast.bound(&t).is_err());
    assert!("ol".parse::<BoundProfile>().is_ok());
    assert!("xx".parse::<BoundProfile>().is_err());
}

#[test]
fn message_size_profiles() {
    let t = trace(AlgorithmSpec::Sm, &[(0, 9), (1, 700), (2, 3), (3, 1), (4, 0)]);
    let w = t.header.widths;
    let stats = message_bit_stats(&t);
    assert_eq!(stats.len(), 1);
    assert!(t.envelopes().all(|e| e.bit_size == 8 + w.id + w.val));

    let n = 5;
    let t = trace(AlgorithmSpec::Lm, &[(0, 9), (1, 700), (2, 3), (3, 1), (4, 0)]);
    let w = t.header.widths;
    let cap = 8 + 16 + n * (w.id + w.ts) + (w.id + w.val);
    assert!(message_bit_stats(&t)["probe"].max <= cap);

    let lone = run_to_completion(&Scenario::new(
        linkcons::DynamicGraph::new([NodeId(0)], []).unwrap(),
        inputs_from(&[(0, 1)]),
        AlgorithmSpec::Es,
    ))
    .unwrap();
    assert!(message_bit_stats(&lone).is_empty());
}
