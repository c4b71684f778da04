//! Deterministic synchronous-network simulator for consensus under link
//! failures.
//!
//! The crate is layered bottom-up: [`netgraph`] is the ground-truth topology,
//! [`engine`] executes rounds and records traces, [`adversary`] decides which
//! transmissions fail, [`algorithms`] holds the node automata, and
//! [`checker`] verifies recorded traces offline.

pub mod adversary;
pub mod algorithms;
pub mod checker;
pub mod engine;
pub mod netgraph;
pub mod payload;

/// Input (and decision) values. Any totally ordered domain works; the
/// simulator fixes non-negative integers.
pub type Value = u64;

/// Round counter. Round 0 is the local initialisation before the first
/// communication round.
pub type Round = u64;

pub use adversary::{Adversary, AdversarySpec, AdversaryVerdict, CrashSchedule};
pub use algorithms::{AlgorithmSpec, Automaton, Incoming, Outgoing, Verdict};
pub use checker::{BoundProfile, Violation, ViolationKind};
pub use engine::{
    run_to_completion, EngineError, ExecutionTrace, MessageEnvelope, MetricsReport, RoundOutcome, RunStatus, Scenario,
    Simulation,
};
pub use netgraph::{DynamicGraph, GraphError, Link, NodeId, Port};
pub use payload::{BitWidths, InputPair, NodeState, Payload, StampedState, TimestampPair};
