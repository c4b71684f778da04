//! Lazy port binding on the two-part regular family.
//!
//! Ports start unbound: until a port carries a delivered message the node
//! cannot tell which neighbor sits behind it, so the adversary is free to
//! decide. Sends on a node's non-final unbound ports are routed to same-part
//! neighbors. A send on the final unbound port reaches the cross-part
//! neighbor, and that link is failed unless it is the last unused cross link.
//!
//! The graph's port map doubles as the tentative assignment: an unbound port
//! points at some not-yet-covered link, and binding swaps entries so the
//! chosen link lands on the port actually used.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Adversary, AdversaryVerdict, EnvelopeKey};
use crate::engine::{EngineError, MessageEnvelope};
use crate::netgraph::{DynamicGraph, Link, NodeId, Port};
use crate::Round;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub node: NodeId,
    pub port: Port,
    pub neighbor: NodeId,
    pub round: Round,
}

#[derive(Clone, Debug)]
pub struct LazyParts {
    half: u32,
    bound: BTreeMap<NodeId, BTreeSet<Port>>,
    log: Vec<Commitment>,
    unused_cross: BTreeSet<Link>,
    pending_drops: Vec<EnvelopeKey>,
    first_cross_delivery: Option<Round>,
}

fn invariant(msg: String) -> EngineError {
    EngineError::InvariantViolation(msg)
}

impl LazyParts {
    /// Accepts graphs on nodes `0..2h` whose cross links form exactly the
    /// matching `i ↔ i+h`.
    pub fn new(graph: &DynamicGraph) -> Result<Self, EngineError> {
        let n = graph.node_count() as u32;
        let bad = |msg: &str| EngineError::InvalidScenario(format!("lazy-parts topology: {msg}"));
        if n < 2 || !n.is_multiple_of(2) {
            return Err(bad("node count must be even and at least 2"));
        }
        if graph.nodes().iter().map(|x| x.0).ne(0..n) {
            return Err(bad("nodes must be named 0..n-1"));
        }
        let half = n / 2;
        let mut unused_cross = BTreeSet::new();
        for l in graph.links() {
            let (a, b) = (l.lo().0, l.hi().0);
            if (a < half) != (b < half) {
                if b != a + half {
                    return Err(bad("cross links must form the matching i <-> i+n/2"));
                }
                unused_cross.insert(*l);
            }
        }
        if unused_cross.len() as u32 != half {
            return Err(bad("every node needs exactly one cross neighbor"));
        }
        Ok(LazyParts {
            half,
            bound: graph.nodes().iter().map(|&x| (x, BTreeSet::new())).collect(),
            log: Vec::new(),
            unused_cross,
            pending_drops: Vec::new(),
            first_cross_delivery: None,
        })
    }

    pub fn same_part(&self, a: NodeId, b: NodeId) -> bool {
        (a.0 < self.half) == (b.0 < self.half)
    }

    pub fn is_cross(&self, l: &Link) -> bool {
        !self.same_part(l.lo(), l.hi())
    }

    /// Number of cross links that have not carried any send yet.
    pub fn unused_cross(&self) -> usize {
        self.unused_cross.len()
    }

    pub fn commitments(&self) -> &[Commitment] {
        &self.log
    }

    pub fn bound_ports(&self, node: NodeId) -> BTreeSet<Port> {
        self.bound.get(&node).cloned().unwrap_or_default()
    }

    pub fn first_cross_delivery(&self) -> Option<Round> {
        self.first_cross_delivery
    }

    fn unbound_ports(&self, graph: &DynamicGraph, node: NodeId) -> Vec<Port> {
        let bound = &self.bound[&node];
        (0..graph.degree(node)).filter(|p| !bound.contains(p)).collect()
    }

    /// Moves `link` onto `port` of `node` and records the binding.
    fn bind(
        &mut self,
        graph: &mut DynamicGraph,
        node: NodeId,
        port: Port,
        link: Link,
        round: Round,
    ) -> Result<Commitment, EngineError> {
        let at = graph
            .port_of(node, &link)
            .ok_or_else(|| invariant(format!("link {link} not incident to {node}")))?;
        let bound = self.bound.get_mut(&node).expect("all nodes tracked");
        if bound.contains(&at) && at != port {
            return Err(invariant(format!("link {link} already bound at {node} port {at}")));
        }
        if bound.contains(&port) && at != port {
            return Err(invariant(format!("port {port} of {node} already bound")));
        }
        graph.swap_ports(node, at, port)?;
        bound.insert(port);
        let c = Commitment {
            node,
            port,
            neighbor: link.other(node).expect("incident"),
            round,
        };
        self.log.push(c);
        Ok(c)
    }

    /// Binds the receiving end of `link` to the smallest unbound port of `to`,
    /// unless it is bound already.
    fn bind_receiver(
        &mut self,
        graph: &mut DynamicGraph,
        to: NodeId,
        link: Link,
        round: Round,
    ) -> Result<Option<Commitment>, EngineError> {
        let at = graph
            .port_of(to, &link)
            .ok_or_else(|| invariant(format!("link {link} not incident to {to}")))?;
        if self.bound[&to].contains(&at) {
            return Ok(None);
        }
        let port = *self
            .unbound_ports(graph, to)
            .first()
            .ok_or_else(|| invariant(format!("{to} has no unbound port left")))?;
        self.bind(graph, to, port, link, round).map(Some)
    }

    /// Decides a send by `node` through `port`, returning the concrete link,
    /// the verdict and the bindings made.
    pub fn decide(
        &mut self,
        graph: &mut DynamicGraph,
        node: NodeId,
        port: Port,
        round: Round,
    ) -> Result<(Link, AdversaryVerdict, Vec<Commitment>), EngineError> {
        if port >= graph.degree(node) {
            return Err(EngineError::ProtocolViolation(format!(
                "node {node} has no port {port}"
            )));
        }
        let mut made = Vec::new();
        if self.bound[&node].contains(&port) {
            let link = graph.link_at(node, port).expect("port checked");
            let verdict = if self.is_cross(&link) && !graph.is_reliable(&link) {
                AdversaryVerdict::Drop
            } else {
                AdversaryVerdict::Deliver
            };
            return Ok((link, verdict, made));
        }
        let unbound = self.unbound_ports(graph, node);
        if unbound.len() >= 2 {
            let q = unbound
                .iter()
                .filter_map(|&p| graph.link_at(node, p)?.other(node))
                .filter(|&q| self.same_part(node, q))
                .min()
                .ok_or_else(|| invariant(format!("{node} has no uncovered same-part neighbor")))?;
            let link = Link::new(node, q)?;
            made.push(self.bind(graph, node, port, link, round)?);
            made.extend(self.bind_receiver(graph, q, link, round)?);
            return Ok((link, AdversaryVerdict::Deliver, made));
        }
        let link = graph.link_at(node, port).expect("port checked");
        let q = link.other(node).expect("incident");
        made.push(self.bind(graph, node, port, link, round)?);
        if !self.is_cross(&link) {
            made.extend(self.bind_receiver(graph, q, link, round)?);
            return Ok((link, AdversaryVerdict::Deliver, made));
        }
        if !self.unused_cross.remove(&link) {
            return Ok((link, AdversaryVerdict::Drop, made));
        }
        if !self.unused_cross.is_empty() {
            return Ok((link, AdversaryVerdict::Drop, made));
        }
        made.extend(self.bind_receiver(graph, q, link, round)?);
        self.first_cross_delivery.get_or_insert(round);
        Ok((link, AdversaryVerdict::Deliver, made))
    }
}

impl Adversary for LazyParts {
    fn bind_port(
        &mut self,
        graph: &mut DynamicGraph,
        node: NodeId,
        port: Port,
        round: Round,
    ) -> Result<Link, EngineError> {
        let (link, verdict, _) = self.decide(graph, node, port, round)?;
        if verdict == AdversaryVerdict::Drop {
            self.pending_drops.push(EnvelopeKey { link, from: node });
        } else if self.is_cross(&link) {
            self.first_cross_delivery.get_or_insert(round);
        }
        Ok(link)
    }

    fn adjudicate(
        &mut self,
        _graph: &DynamicGraph,
        _round: Round,
        _envelopes: &[MessageEnvelope],
    ) -> Result<Vec<EnvelopeKey>, EngineError> {
        Ok(std::mem::take(&mut self.pending_drops))
    }
}
