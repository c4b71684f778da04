//! Offline verification of recorded traces.
//!
//! Every check is a pure function of an [`ExecutionTrace`], so verdicts can
//! be reproduced from a serialized trace alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::AlgorithmSpec;
use crate::engine::{link_usage, stretch_sequence, ExecutionTrace, LinkUsage, RunStatus};
use crate::netgraph::NodeId;
use crate::Round;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Termination,
    Validity,
    Agreement,
    Bound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub round: Round,
    pub nodes: BTreeSet<NodeId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        write!(
            f,
            "{:?} at round {} [{}]: {}",
            self.kind,
            self.round,
            nodes.join(","),
            self.detail
        )
    }
}

pub fn check_validity(trace: &ExecutionTrace) -> Vec<Violation> {
    let inputs: BTreeSet<_> = trace.inputs.values().copied().collect();
    trace
        .decisions
        .iter()
        .filter(|(_, d)| !inputs.contains(&d.value))
        .map(|(&n, d)| Violation {
            kind: ViolationKind::Validity,
            round: d.round,
            nodes: [n].into(),
            detail: format!("decided {} which is no node's input", d.value),
        })
        .collect()
}

/// Agreement at every decision event: a node deciding at round `r` must
/// match every node that decided at or before `r` and is reachable over
/// links whose first drop happened after `r`.
pub fn check_event_agreement(trace: &ExecutionTrace) -> Vec<Violation> {
    let mut by_round: BTreeMap<Round, Vec<NodeId>> = BTreeMap::new();
    for (&n, d) in &trace.decisions {
        by_round.entry(d.round).or_default().push(n);
    }
    let mut out = Vec::new();
    let mut decided: Vec<NodeId> = Vec::new();
    for (&r, nodes) in &by_round {
        decided.extend(nodes.iter().copied());
        let g = trace.graph_at(r);
        let comps = g.connected_components();
        let comp_of: BTreeMap<NodeId, usize> = comps
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&n| (n, i)))
            .collect();
        for &p in nodes {
            let v = trace.decisions[&p].value;
            for &q in &decided {
                if q == p || comp_of[&q] != comp_of[&p] {
                    continue;
                }
                let w = trace.decisions[&q].value;
                // report each unordered pair once
                if w != v && (trace.decisions[&q].round < r || q < p) {
                    out.push(Violation {
                        kind: ViolationKind::Agreement,
                        round: r,
                        nodes: [p, q].into(),
                        detail: format!("{p} decided {v} while reliably connected {q} decided {w}"),
                    });
                }
            }
        }
    }
    out
}

/// Coarser agreement: within each component of the final graph all
/// decisions are equal.
pub fn check_final_agreement(trace: &ExecutionTrace) -> Vec<Violation> {
    let mut out = Vec::new();
    for comp in trace.final_graph.connected_components() {
        let values: BTreeMap<u64, BTreeSet<NodeId>> = comp
            .iter()
            .filter_map(|n| trace.decisions.get(n).map(|d| (d.value, *n)))
            .fold(BTreeMap::new(), |mut acc, (v, n)| {
                acc.entry(v).or_insert_with(BTreeSet::new).insert(n);
                acc
            });
        if values.len() > 1 {
            let nodes: BTreeSet<NodeId> = values.values().flatten().copied().collect();
            let round = nodes.iter().map(|n| trace.decisions[n].round).max().unwrap_or(0);
            out.push(Violation {
                kind: ViolationKind::Agreement,
                round,
                nodes,
                detail: format!(
                    "final component holds distinct decisions {:?}",
                    values.keys().collect::<Vec<_>>()
                ),
            });
        }
    }
    out
}

/// Both agreement checks, event-level first.
pub fn check_agreement(trace: &ExecutionTrace) -> Vec<Violation> {
    let mut v = check_event_agreement(trace);
    v.extend(check_final_agreement(trace));
    v
}

pub fn check_termination(trace: &ExecutionTrace, bound: Round) -> Option<Violation> {
    let undecided: BTreeSet<NodeId> = trace
        .initial_graph
        .nodes()
        .iter()
        .filter(|n| !trace.decisions.contains_key(n))
        .copied()
        .collect();
    if !undecided.is_empty() || trace.status == RunStatus::TimedOut {
        return Some(Violation {
            kind: ViolationKind::Termination,
            round: trace.last_round(),
            nodes: undecided,
            detail: "run ended with undecided nodes".into(),
        });
    }
    let late: BTreeSet<NodeId> = trace
        .decisions
        .iter()
        .filter(|(_, d)| d.round > bound)
        .map(|(&n, _)| n)
        .collect();
    if late.is_empty() {
        return None;
    }
    let round = late.iter().map(|n| trace.decisions[n].round).max().unwrap_or(0);
    Some(Violation {
        kind: ViolationKind::Termination,
        round,
        nodes: late,
        detail: format!("decided after the bound of {bound} rounds"),
    })
}

/// Flags the first decrease in a per-round stretch sequence.
pub fn check_stretch_monotone(sequence: &[usize]) -> Option<Violation> {
    sequence.windows(2).position(|w| w[1] < w[0]).map(|i| Violation {
        kind: ViolationKind::Bound,
        round: i as Round + 1,
        nodes: BTreeSet::new(),
        detail: format!("stretch fell from {} to {}", sequence[i], sequence[i + 1]),
    })
}

pub fn check_trace_stretch_monotone(trace: &ExecutionTrace) -> Option<Violation> {
    check_stretch_monotone(&stretch_sequence(trace))
}

pub fn usage(trace: &ExecutionTrace) -> LinkUsage {
    link_usage(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitStats {
    pub count: usize,
    pub max: u64,
    pub mean: f64,
}

/// Per payload class: message count, maximum and mean bit size.
pub fn message_bit_stats(trace: &ExecutionTrace) -> BTreeMap<String, BitStats> {
    let mut acc: BTreeMap<&'static str, (usize, u64, u64)> = BTreeMap::new();
    for e in trace.envelopes() {
        let slot = acc.entry(e.payload.class()).or_default();
        slot.0 += 1;
        slot.1 = slot.1.max(e.bit_size);
        slot.2 += e.bit_size;
    }
    acc.into_iter()
        .map(|(k, (count, max, sum))| {
            (
                k.to_string(),
                BitStats {
                    count,
                    max,
                    mean: sum as f64 / count as f64,
                },
            )
        })
        .collect()
}

/// Per-algorithm termination bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundProfile {
    Fast,
    Sm,
    Lm,
    Es,
    Ol,
}

impl FromStr for BoundProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(BoundProfile::Fast),
            "sm" => Ok(BoundProfile::Sm),
            "lm" => Ok(BoundProfile::Lm),
            "es" => Ok(BoundProfile::Es),
            "ol" => Ok(BoundProfile::Ol),
            other => Err(format!("unknown bound profile `{other}`")),
        }
    }
}

impl BoundProfile {
    /// Round bound for `trace`, with λ the stretch of its final graph.
    /// The `fast` profile reads Λ from the trace header.
    pub fn bound(&self, trace: &ExecutionTrace) -> Result<Round, String> {
        let n = trace.node_count() as Round;
        let m = trace.link_count() as Round;
        let lambda = trace.final_graph.stretch() as Round;
        Ok(match self {
            BoundProfile::Fast => match trace.header.algorithm {
                AlgorithmSpec::Fast { lambda } => lambda,
                other => return Err(format!("fast profile needs a fast trace, got {}", other.id())),
            },
            BoundProfile::Sm => n + 2,
            BoundProfile::Lm => (lambda + 2).pow(3),
            BoundProfile::Es => lambda + 2,
            BoundProfile::Ol => 4 * n * m,
        })
    }
}

/// Runs validity, both agreement checks, termination against `profile` and
/// stretch monotonicity.
pub fn verify(trace: &ExecutionTrace, profile: BoundProfile) -> Result<Vec<Violation>, String> {
    let bound = profile.bound(trace)?;
    let mut out = check_validity(trace);
    out.extend(check_agreement(trace));
    out.extend(check_termination(trace, bound));
    out.extend(check_trace_stretch_monotone(trace));
    Ok(out)
}
