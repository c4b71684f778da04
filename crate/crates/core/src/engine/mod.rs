//! Synchronous round executor.
//!
//! A round runs in four phases: every live node emits, the adversary
//! adjudicates the whole batch, survivors are delivered, and live nodes
//! absorb their inboxes. The ground-truth graph records a link as unreliable
//! at its first dropped envelope.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{Adversary, AdversarySpec, EnvelopeKey};
use crate::algorithms::{AlgorithmSpec, Automaton, Incoming, NodeContext, Verdict};
use crate::netgraph::{DynamicGraph, GraphError, Link, NodeId};
use crate::payload::{BitWidths, Payload};
use crate::{Round, Value};

pub mod metrics;
pub mod trace;

pub use metrics::{link_usage, metrics, stretch_sequence, LinkUsage, MetricsReport};
pub use trace::{from_lines, to_lines, TraceError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageEnvelope {
    pub link: Link,
    pub from: NodeId,
    pub to: NodeId,
    pub round: Round,
    pub bit_size: u64,
    pub payload: Payload,
}

impl MessageEnvelope {
    pub fn key(&self) -> EnvelopeKey {
        EnvelopeKey {
            link: self.link,
            from: self.from,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub round: Round,
    pub sent: Vec<MessageEnvelope>,
    /// Indices into `sent`.
    pub dropped: Vec<usize>,
    pub newly_unreliable: BTreeSet<Link>,
    pub halted: BTreeMap<NodeId, Value>,
}

impl RoundOutcome {
    pub fn dropped_envelopes(&self) -> impl Iterator<Item = &MessageEnvelope> {
        self.dropped.iter().map(|&i| &self.sent[i])
    }

    pub fn delivered_envelopes(&self) -> impl Iterator<Item = &MessageEnvelope> {
        let dropped: BTreeSet<usize> = self.dropped.iter().copied().collect();
        self.sent
            .iter()
            .enumerate()
            .filter(move |(i, _)| !dropped.contains(i))
            .map(|(_, e)| e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub value: Value,
    pub round: Round,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    TimedOut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algorithm: AlgorithmSpec,
    pub adversary: AdversarySpec,
    pub round_limit: Round,
    pub seed: u64,
    pub widths: BitWidths,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub header: TraceHeader,
    pub initial_graph: DynamicGraph,
    pub inputs: BTreeMap<NodeId, Value>,
    pub rounds: Vec<RoundOutcome>,
    pub decisions: BTreeMap<NodeId, Decision>,
    pub final_graph: DynamicGraph,
    pub status: RunStatus,
}

impl ExecutionTrace {
    pub fn node_count(&self) -> usize {
        self.initial_graph.node_count()
    }

    pub fn link_count(&self) -> usize {
        self.initial_graph.link_count()
    }

    pub fn envelopes(&self) -> impl Iterator<Item = &MessageEnvelope> {
        self.rounds.iter().flat_map(|r| r.sent.iter())
    }

    /// Latest decision round, or the last executed round if the run timed out.
    pub fn last_round(&self) -> Round {
        self.rounds.last().map_or(0, |r| r.round)
    }

    /// Reliable graph after applying all first drops up to and including
    /// round `r`.
    pub fn graph_at(&self, r: Round) -> DynamicGraph {
        let mut g = self.initial_graph.clone();
        for outcome in self.rounds.iter().take_while(|o| o.round <= r) {
            for l in &outcome.newly_unreliable {
                g.fail_link(*l).expect("trace links come from the topology");
            }
        }
        g
    }
}

/// Everything needed to run one execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub graph: DynamicGraph,
    pub inputs: BTreeMap<NodeId, Value>,
    pub algorithm: AlgorithmSpec,
    pub adversary: AdversarySpec,
    pub round_limit: Round,
    pub seed: u64,
}

impl Scenario {
    /// Scenario with no adversary and the default round limit.
    pub fn new(graph: DynamicGraph, inputs: BTreeMap<NodeId, Value>, algorithm: AlgorithmSpec) -> Self {
        let round_limit = default_round_limit(&graph);
        Scenario {
            graph,
            inputs,
            algorithm,
            adversary: AdversarySpec::None,
            round_limit,
            seed: 0,
        }
    }

    pub fn with_adversary(mut self, adversary: AdversarySpec) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn with_round_limit(mut self, limit: Round) -> Self {
        self.round_limit = limit;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn widths(&self) -> BitWidths {
        let max_name = self.graph.nodes().iter().next_back().copied().unwrap_or(NodeId(0));
        let max_input = self.inputs.values().copied().max().unwrap_or(0);
        BitWidths::new(max_name, max_input, self.round_limit)
    }
}

/// `4·n·m + 16`.
pub fn default_round_limit(g: &DynamicGraph) -> Round {
    4 * g.node_count() as Round * g.link_count() as Round + 16
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SlotStatus {
    Live,
    Announcing(Value),
    Halted,
}

struct Slot {
    automaton: Box<dyn Automaton>,
    status: SlotStatus,
}

pub struct Simulation {
    header: TraceHeader,
    initial: DynamicGraph,
    graph: DynamicGraph,
    inputs: BTreeMap<NodeId, Value>,
    slots: BTreeMap<NodeId, Slot>,
    adversary: Box<dyn Adversary>,
    round: Round,
    rounds: Vec<RoundOutcome>,
    decisions: BTreeMap<NodeId, Decision>,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self, EngineError> {
        // ol starts from its neighbors' names, which lazy binding leaves open
        if scenario.algorithm == AlgorithmSpec::Ol && scenario.adversary == AdversarySpec::LazyParts {
            return Err(EngineError::InvalidScenario(
                "ol needs its neighbors' names at the start; lazy-parts binds ports later".into(),
            ));
        }
        let adversary = scenario.adversary.build(&scenario.graph)?;
        Self::with_adversary(scenario, adversary)
    }

    /// Uses a caller-supplied adversary instead of the one named in the
    /// scenario.
    pub fn with_adversary(scenario: &Scenario, adversary: Box<dyn Adversary>) -> Result<Self, EngineError> {
        let g = &scenario.graph;
        if g.node_count() == 0 {
            return Err(EngineError::InvalidScenario("empty topology".into()));
        }
        if !g.unreliable().is_empty() {
            return Err(EngineError::InvalidScenario("topology already has failed links".into()));
        }
        if !g.is_connected() {
            return Err(EngineError::InvalidScenario("initial topology is not connected".into()));
        }
        let keys: BTreeSet<NodeId> = scenario.inputs.keys().copied().collect();
        if &keys != g.nodes() {
            return Err(EngineError::InvalidScenario(
                "inputs must cover every node exactly once".into(),
            ));
        }
        let mut slots = BTreeMap::new();
        let mut decisions = BTreeMap::new();
        for &n in g.nodes() {
            let ctx = NodeContext {
                name: n,
                input: scenario.inputs[&n],
                neighbors: g.neighbors(n),
            };
            let mut automaton = scenario.algorithm.instantiate(ctx);
            let status = match automaton.start() {
                Verdict::Continue => SlotStatus::Live,
                Verdict::Decide(v) => {
                    decisions.insert(n, Decision { value: v, round: 0 });
                    SlotStatus::Halted
                }
                Verdict::DecideAfterEmit(v) => SlotStatus::Announcing(v),
            };
            slots.insert(n, Slot { automaton, status });
        }
        Ok(Simulation {
            header: TraceHeader {
                algorithm: scenario.algorithm,
                adversary: scenario.adversary.clone(),
                round_limit: scenario.round_limit,
                seed: scenario.seed,
                widths: scenario.widths(),
            },
            initial: g.clone(),
            graph: g.clone(),
            inputs: scenario.inputs.clone(),
            slots,
            adversary,
            round: 0,
            rounds: Vec::new(),
            decisions,
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn round(&self) -> Round {
        self.round
    }

    pub fn decisions(&self) -> &BTreeMap<NodeId, Decision> {
        &self.decisions
    }

    pub fn rounds(&self) -> &[RoundOutcome] {
        &self.rounds
    }

    pub fn finished(&self) -> bool {
        self.slots.values().all(|s| s.status == SlotStatus::Halted)
    }

    /// Executes the next round.
    pub fn step(&mut self) -> Result<&RoundOutcome, EngineError> {
        if self.finished() {
            return Err(EngineError::InvariantViolation("all nodes already halted".into()));
        }
        self.round += 1;
        let r = self.round;
        let widths = self.header.widths;

        // Phase 1: outboxes.
        let mut sent: Vec<MessageEnvelope> = Vec::new();
        for (&node, slot) in self.slots.iter_mut() {
            if slot.status == SlotStatus::Halted {
                continue;
            }
            let outbox = slot.automaton.emit(r);
            let mut used_ports = BTreeSet::new();
            for out in outbox {
                if out.port >= self.graph.degree(node) {
                    return Err(EngineError::ProtocolViolation(format!(
                        "node {node} sent on nonexistent port {}",
                        out.port
                    )));
                }
                if !used_ports.insert(out.port) {
                    return Err(EngineError::ProtocolViolation(format!(
                        "node {node} sent twice on port {} in round {r}",
                        out.port
                    )));
                }
                let link = self.adversary.bind_port(&mut self.graph, node, out.port, r)?;
                let to = link.other(node).ok_or_else(|| {
                    EngineError::InvariantViolation(format!("port of {node} bound to foreign link {link}"))
                })?;
                sent.push(MessageEnvelope {
                    link,
                    from: node,
                    to,
                    round: r,
                    bit_size: out.payload.bit_size(&widths),
                    payload: out.payload,
                });
            }
        }

        // Phase 2: adjudication.
        let drops = self.adversary.adjudicate(&self.graph, r, &sent)?;
        let index: BTreeMap<EnvelopeKey, usize> = sent.iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
        let mut dropped = BTreeSet::new();
        for key in drops {
            let i = *index.get(&key).ok_or_else(|| {
                EngineError::ProtocolViolation(format!(
                    "adversary dropped nonexistent envelope on {} from {}",
                    key.link, key.from
                ))
            })?;
            dropped.insert(i);
        }
        let mut newly_unreliable = BTreeSet::new();
        for &i in &dropped {
            let link = sent[i].link;
            if self.graph.fail_link(link)? {
                newly_unreliable.insert(link);
            }
        }

        // Phase 3: delivery, inboxes ordered by sender.
        let mut inboxes: BTreeMap<NodeId, Vec<(NodeId, Incoming)>> = BTreeMap::new();
        for (i, env) in sent.iter().enumerate() {
            if dropped.contains(&i) {
                continue;
            }
            let port = self.graph.port_of(env.to, &env.link).ok_or_else(|| {
                EngineError::InvariantViolation(format!("link {} missing from port map of {}", env.link, env.to))
            })?;
            inboxes.entry(env.to).or_default().push((
                env.from,
                Incoming {
                    port,
                    payload: env.payload.clone(),
                },
            ));
        }

        // Phase 4: absorb.
        let mut halted = BTreeMap::new();
        for (&node, slot) in self.slots.iter_mut() {
            match slot.status {
                SlotStatus::Halted => {}
                SlotStatus::Announcing(v) => {
                    slot.status = SlotStatus::Halted;
                    halted.insert(node, v);
                }
                SlotStatus::Live => {
                    let mut inbox = inboxes.remove(&node).unwrap_or_default();
                    inbox.sort_by_key(|(from, _)| *from);
                    let inbox: Vec<Incoming> = inbox.into_iter().map(|(_, m)| m).collect();
                    match slot.automaton.absorb(r, &inbox) {
                        Verdict::Continue => {}
                        Verdict::Decide(v) => {
                            slot.status = SlotStatus::Halted;
                            halted.insert(node, v);
                        }
                        Verdict::DecideAfterEmit(v) => slot.status = SlotStatus::Announcing(v),
                    }
                }
            }
        }
        for (&node, &value) in &halted {
            self.decisions.insert(node, Decision { value, round: r });
        }

        self.rounds.push(RoundOutcome {
            round: r,
            sent,
            dropped: dropped.into_iter().collect(),
            newly_unreliable,
            halted,
        });
        Ok(self.rounds.last().expect("just pushed"))
    }

    /// Runs until every node halts or the round limit is reached.
    pub fn run(mut self) -> Result<ExecutionTrace, EngineError> {
        while !self.finished() {
            if self.round >= self.header.round_limit {
                return Ok(self.into_trace(RunStatus::TimedOut));
            }
            self.step()?;
        }
        Ok(self.into_trace(RunStatus::Completed))
    }

    fn into_trace(self, status: RunStatus) -> ExecutionTrace {
        ExecutionTrace {
            header: self.header,
            initial_graph: self.initial,
            inputs: self.inputs,
            rounds: self.rounds,
            decisions: self.decisions,
            final_graph: self.graph,
            status,
        }
    }
}

pub fn run_to_completion(scenario: &Scenario) -> Result<ExecutionTrace, EngineError> {
    Simulation::new(scenario)?.run()
}
