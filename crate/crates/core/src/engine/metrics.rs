//! Metrics derived from a recorded trace.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ExecutionTrace, RunStatus};
use crate::netgraph::{Link, NodeId};
use crate::Round;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub algorithm: String,
    pub status: RunStatus,
    pub n: usize,
    pub m: usize,
    pub node_halt_rounds: BTreeMap<NodeId, Round>,
    /// Round of the last decision; `None` if some node never decided.
    pub halt_round: Option<Round>,
    /// Stretch of the final graph.
    pub lambda: usize,
    pub max_message_bits: u64,
    pub total_messages: usize,
    pub used_links: usize,
    pub concurrent_links_max: usize,
    pub concurrent_links_per_round: Vec<usize>,
    /// Entry 0 is the initial graph, entry `r` the graph after round `r`.
    pub stretch_per_round: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkUsage {
    pub cumulative_used: usize,
    pub per_round_concurrent_max: usize,
}

/// Links carrying at least one sent envelope in each round.
pub fn links_per_round(trace: &ExecutionTrace) -> Vec<BTreeSet<Link>> {
    trace
        .rounds
        .iter()
        .map(|r| r.sent.iter().map(|e| e.link).collect())
        .collect()
}

pub fn link_usage(trace: &ExecutionTrace) -> LinkUsage {
    let per_round = links_per_round(trace);
    let all: BTreeSet<Link> = per_round.iter().flatten().copied().collect();
    LinkUsage {
        cumulative_used: all.len(),
        per_round_concurrent_max: per_round.iter().map(BTreeSet::len).max().unwrap_or(0),
    }
}

/// Stretch of the initial graph followed by the stretch after every round.
pub fn stretch_sequence(trace: &ExecutionTrace) -> Vec<usize> {
    let mut g = trace.initial_graph.clone();
    let mut current = g.stretch();
    let mut seq = vec![current];
    for r in &trace.rounds {
        if !r.newly_unreliable.is_empty() {
            for l in &r.newly_unreliable {
                g.fail_link(*l).expect("trace links come from the topology");
            }
            current = g.stretch();
        }
        seq.push(current);
    }
    seq
}

pub fn metrics(trace: &ExecutionTrace) -> MetricsReport {
    let node_halt_rounds: BTreeMap<NodeId, Round> = trace.decisions.iter().map(|(&n, d)| (n, d.round)).collect();
    let all_decided = trace.decisions.len() == trace.node_count();
    let per_round: Vec<usize> = links_per_round(trace).iter().map(BTreeSet::len).collect();
    let usage = link_usage(trace);
    MetricsReport {
        algorithm: trace.header.algorithm.id().to_string(),
        status: trace.status,
        n: trace.node_count(),
        m: trace.link_count(),
        halt_round: if all_decided {
            node_halt_rounds.values().copied().max()
        } else {
            None
        },
        node_halt_rounds,
        lambda: trace.final_graph.stretch(),
        max_message_bits: trace.envelopes().map(|e| e.bit_size).max().unwrap_or(0),
        total_messages: trace.envelopes().count(),
        used_links: usage.cumulative_used,
        concurrent_links_max: usage.per_round_concurrent_max,
        concurrent_links_per_round: per_round,
        stretch_per_round: stretch_sequence(trace),
    }
}
