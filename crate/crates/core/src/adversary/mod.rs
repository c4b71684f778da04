//! Failure strategies and topology generators.
//!
//! An [`Adversary`] sees only public execution data: the envelopes of the
//! current round, the ground-truth link statuses and the round number. It
//! never inspects node state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, MessageEnvelope};
use crate::netgraph::{DynamicGraph, Link, NodeId, Port};
use crate::Round;

pub mod crash;
pub mod cut;
pub mod generators;
pub mod lazy;

pub use crash::{crash_decide, random_schedule, CrashAdversary, CrashSchedule};
pub use cut::BipartiteCut;
pub use lazy::{Commitment, LazyParts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryVerdict {
    Deliver,
    Drop,
}

impl AdversaryVerdict {
    pub fn delivers(self) -> bool {
        self == AdversaryVerdict::Deliver
    }
}

/// Identifies one envelope within a round: a link and its sending endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnvelopeKey {
    pub link: Link,
    pub from: NodeId,
}

pub trait Adversary: Send {
    /// Resolves the link behind `port` of `node` for a send in `round`. The
    /// default reads the graph's fixed port map.
    fn bind_port(
        &mut self,
        graph: &mut DynamicGraph,
        node: NodeId,
        port: Port,
        _round: Round,
    ) -> Result<Link, EngineError> {
        graph
            .link_at(node, port)
            .ok_or_else(|| EngineError::ProtocolViolation(format!("node {node} has no port {port}")))
    }

    /// Returns the envelopes of this round that must be dropped. `graph`
    /// reflects failures up to the previous round.
    fn adjudicate(
        &mut self,
        graph: &DynamicGraph,
        round: Round,
        envelopes: &[MessageEnvelope],
    ) -> Result<Vec<EnvelopeKey>, EngineError>;
}

/// Delivers everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoFailures;

impl Adversary for NoFailures {
    fn adjudicate(
        &mut self,
        _graph: &DynamicGraph,
        _round: Round,
        _envelopes: &[MessageEnvelope],
    ) -> Result<Vec<EnvelopeKey>, EngineError> {
        Ok(Vec::new())
    }
}

/// Serializable description of a strategy, stored in trace headers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum AdversarySpec {
    #[default]
    None,
    CrashSchedule {
        schedule: CrashSchedule,
    },
    /// `part` defaults to the lower half of the node names.
    BipartiteCut {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        part: Option<BTreeSet<NodeId>>,
    },
    LazyParts,
}

impl AdversarySpec {
    pub fn id(&self) -> &'static str {
        match self {
            AdversarySpec::None => "none",
            AdversarySpec::CrashSchedule { .. } => "crash-schedule",
            AdversarySpec::BipartiteCut { .. } => "bipartite-cut",
            AdversarySpec::LazyParts => "lazy-parts",
        }
    }

    pub fn build(&self, graph: &DynamicGraph) -> Result<Box<dyn Adversary>, EngineError> {
        Ok(match self {
            AdversarySpec::None => Box::new(NoFailures),
            AdversarySpec::CrashSchedule { schedule } => Box::new(CrashAdversary::new(schedule, graph)?),
            AdversarySpec::BipartiteCut { part } => {
                let part = match part {
                    Some(p) => p.clone(),
                    None => lower_half(graph),
                };
                Box::new(BipartiteCut::new(graph, part)?)
            }
            AdversarySpec::LazyParts => Box::new(LazyParts::new(graph)?),
        })
    }
}

/// The first `⌊n/2⌋` node names.
pub fn lower_half(graph: &DynamicGraph) -> BTreeSet<NodeId> {
    let half = graph.node_count() / 2;
    graph.nodes().iter().take(half).copied().collect()
}
