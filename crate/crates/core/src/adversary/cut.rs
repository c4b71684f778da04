//! Cut adversary for two-part joins: fails cross links on first use while
//! at least one other cross link stays reliable.

use std::collections::BTreeSet;

use super::{Adversary, AdversaryVerdict, EnvelopeKey};
use crate::engine::{EngineError, MessageEnvelope};
use crate::netgraph::{DynamicGraph, Link, NodeId};
use crate::Round;

#[derive(Clone, Debug)]
pub struct BipartiteCut {
    part: BTreeSet<NodeId>,
    reliable_cross: BTreeSet<Link>,
}

impl BipartiteCut {
    pub fn new(graph: &DynamicGraph, part: BTreeSet<NodeId>) -> Result<Self, EngineError> {
        if part.is_empty() || part.len() >= graph.node_count() {
            return Err(EngineError::InvalidScenario(
                "cut part must be a non-empty proper subset of the nodes".into(),
            ));
        }
        if let Some(n) = part.iter().find(|n| !graph.contains_node(**n)) {
            return Err(EngineError::InvalidScenario(format!("cut part names unknown node {n}")));
        }
        let reliable_cross: BTreeSet<Link> = graph
            .links()
            .iter()
            .filter(|l| graph.is_reliable(l) && part.contains(&l.lo()) != part.contains(&l.hi()))
            .copied()
            .collect();
        if reliable_cross.is_empty() {
            return Err(EngineError::InvalidScenario("no reliable link crosses the cut".into()));
        }
        Ok(BipartiteCut { part, reliable_cross })
    }

    pub fn is_cross(&self, l: &Link) -> bool {
        self.part.contains(&l.lo()) != self.part.contains(&l.hi())
    }

    pub fn reliable_cross(&self) -> &BTreeSet<Link> {
        &self.reliable_cross
    }

    pub fn decide(&mut self, envelope: &MessageEnvelope) -> AdversaryVerdict {
        let l = envelope.link;
        if !self.is_cross(&l) {
            return AdversaryVerdict::Deliver;
        }
        if !self.reliable_cross.contains(&l) {
            return AdversaryVerdict::Drop;
        }
        if self.reliable_cross.len() > 1 {
            self.reliable_cross.remove(&l);
            AdversaryVerdict::Drop
        } else {
            AdversaryVerdict::Deliver
        }
    }
}

impl Adversary for BipartiteCut {
    fn adjudicate(
        &mut self,
        _graph: &DynamicGraph,
        _round: Round,
        envelopes: &[MessageEnvelope],
    ) -> Result<Vec<EnvelopeKey>, EngineError> {
        Ok(envelopes
            .iter()
            .filter(|e| self.decide(e) == AdversaryVerdict::Drop)
            .map(MessageEnvelope::key)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payload::Payload;

    fn env(u: u32, v: u32) -> MessageEnvelope {
        let link = Link::new(NodeId(u), NodeId(v)).unwrap();
        MessageEnvelope {
            link,
            from: NodeId(u),
            to: NodeId(v),
            round: 1,
            bit_size: 9,
            payload: Payload::Decision { value: 0 },
        }
    }

    #[test]
    fn drops_until_last_cross_link() {
        // parts {0,1} and {2,3}, complete bipartite cross links
        let g = DynamicGraph::from_edges([(0, 1), (2, 3), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let mut cut = BipartiteCut::new(&g, [NodeId(0), NodeId(1)].into()).unwrap();
        assert_eq!(cut.decide(&env(0, 1)), AdversaryVerdict::Deliver);
        assert_eq!(cut.decide(&env(0, 2)), AdversaryVerdict::Drop);
        assert_eq!(cut.decide(&env(0, 3)), AdversaryVerdict::Drop);
        assert_eq!(cut.decide(&env(1, 2)), AdversaryVerdict::Drop);
        assert_eq!(cut.reliable_cross().len(), 1);
        assert_eq!(cut.decide(&env(1, 3)), AdversaryVerdict::Deliver);
        assert_eq!(cut.decide(&env(1, 3)), AdversaryVerdict::Deliver);
        assert_eq!(cut.decide(&env(0, 2)), AdversaryVerdict::Drop);
    }
}
