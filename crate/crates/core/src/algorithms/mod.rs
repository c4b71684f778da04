//! Consensus node automata behind a common emit/absorb interface.
//!
//! The engine drives every live node through two calls per round: [`emit`]
//! produces the outbox from the current state, then [`absorb`] consumes the
//! delivered inbox. A node halts by returning a deciding [`Verdict`].
//!
//! [`emit`]: Automaton::emit
//! [`absorb`]: Automaton::absorb

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::netgraph::{NodeId, Port};
use crate::payload::Payload;
use crate::{Round, Value};

pub mod es;
pub mod fast;
pub mod lm;
pub mod ol;
pub mod relay;
pub mod sm;

pub use es::EsNode;
pub use fast::FastNode;
pub use lm::LmNode;
pub use ol::OlNode;
pub use relay::decision_relay;
pub use sm::SmNode;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outgoing {
    pub port: Port,
    pub payload: Payload,
}

/// A delivered message as the recipient sees it: only the local port it
/// arrived on, never the sender's name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incoming {
    pub port: Port,
    pub payload: Payload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Continue,
    /// Decide now and halt.
    Decide(Value),
    /// Run one more emit phase next round, then decide and halt without
    /// absorbing.
    DecideAfterEmit(Value),
}

pub trait Automaton: Send {
    /// Local initialisation at round 0.
    fn start(&mut self) -> Verdict {
        Verdict::Continue
    }

    fn emit(&mut self, round: Round) -> Vec<Outgoing>;

    /// `inbox` is sorted by sender name.
    fn absorb(&mut self, round: Round, inbox: &[Incoming]) -> Verdict;
}

/// What a node knows when it wakes up.
#[derive(Clone, Debug)]
pub struct NodeContext {
    pub name: NodeId,
    pub input: Value,
    /// Neighbor names in port order. Only algorithms that assume known
    /// neighbors may look at these; the others use `neighbors.len()` only.
    pub neighbors: Vec<NodeId>,
}

impl NodeContext {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    /// Flooding with a known stretch bound.
    Fast { lambda: Round },
    /// Short messages.
    Sm,
    /// Linear messages, early stopping.
    Lm,
    /// Early stopping with full snapshots.
    Es,
    /// Link-economical.
    Ol,
}

impl AlgorithmSpec {
    pub fn id(&self) -> &'static str {
        match self {
            AlgorithmSpec::Fast { .. } => "fast",
            AlgorithmSpec::Sm => "sm",
            AlgorithmSpec::Lm => "lm",
            AlgorithmSpec::Es => "es",
            AlgorithmSpec::Ol => "ol",
        }
    }

    pub fn instantiate(&self, ctx: NodeContext) -> Box<dyn Automaton> {
        match *self {
            AlgorithmSpec::Fast { lambda } => Box::new(FastNode::new(&ctx, lambda)),
            AlgorithmSpec::Sm => Box::new(SmNode::new(&ctx)),
            AlgorithmSpec::Lm => Box::new(LmNode::new(&ctx)),
            AlgorithmSpec::Es => Box::new(EsNode::new(&ctx)),
            AlgorithmSpec::Ol => Box::new(OlNode::new(&ctx)),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::Fast { lambda } => write!(f, "fast(lambda={lambda})"),
            other => f.write_str(other.id()),
        }
    }
}

/// Sends `payload` through every port in `ports`.
pub(crate) fn broadcast(ports: impl IntoIterator<Item = Port>, payload: &Payload) -> Vec<Outgoing> {
    ports
        .into_iter()
        .map(|port| Outgoing {
            port,
            payload: payload.clone(),
        })
        .collect()
}
