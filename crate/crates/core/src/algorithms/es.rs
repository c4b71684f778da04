//! Early-stopping consensus by snapshot gossip.
//!
//! After a naming round, nodes exchange everything they know (nodes, working
//! links, failed links, input pairs) with every named neighbor until every
//! node in their own snapshot component has a known input.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Automaton, Incoming, NodeContext, Outgoing, Verdict};
use crate::netgraph::{Link, NodeId, Port};
use crate::payload::{InputPair, Payload};
use crate::{Round, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Discovery,
    Survey,
    FinalSend,
    Halted,
}

#[derive(Clone, Debug)]
pub struct EsNode {
    name: NodeId,
    degree: usize,
    nodes: BTreeSet<NodeId>,
    inputs: BTreeMap<NodeId, Value>,
    links: BTreeSet<Link>,
    unreliable: BTreeSet<Link>,
    neighbor_of_port: BTreeMap<Port, NodeId>,
    phase: Phase,
}

impl EsNode {
    pub fn new(ctx: &NodeContext) -> Self {
        EsNode {
            name: ctx.name,
            degree: ctx.degree(),
            nodes: [ctx.name].into(),
            inputs: [(ctx.name, ctx.input)].into(),
            links: BTreeSet::new(),
            unreliable: BTreeSet::new(),
            neighbor_of_port: BTreeMap::new(),
            phase: Phase::Discovery,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    pub fn unreliable(&self) -> &BTreeSet<Link> {
        &self.unreliable
    }

    pub fn inputs(&self) -> &BTreeMap<NodeId, Value> {
        &self.inputs
    }

    pub fn neighbor_of_port(&self) -> &BTreeMap<Port, NodeId> {
        &self.neighbor_of_port
    }

    /// Members of this node's component in its own snapshot graph.
    pub fn snapshot_component(&self) -> BTreeSet<NodeId> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for l in self.links.difference(&self.unreliable) {
            adj.entry(l.lo()).or_default().push(l.hi());
            adj.entry(l.hi()).or_default().push(l.lo());
        }
        let mut comp = BTreeSet::from([self.name]);
        let mut queue = VecDeque::from([self.name]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).into_iter().flatten() {
                if self.nodes.contains(&v) && comp.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        comp
    }

    pub fn unsettled(&self) -> BTreeSet<NodeId> {
        self.snapshot_component()
            .into_iter()
            .filter(|q| !self.inputs.contains_key(q))
            .collect()
    }

    fn snapshot(&self) -> Payload {
        Payload::Snapshot {
            nodes: self.nodes.iter().copied().collect(),
            links: self.links.iter().copied().collect(),
            unreliable: self.unreliable.iter().copied().collect(),
            inputs: self
                .inputs
                .iter()
                .map(|(&name, &input)| InputPair { name, input })
                .collect(),
        }
    }

    fn merge(&mut self, payload: &Payload) {
        if let Payload::Snapshot {
            nodes,
            links,
            unreliable,
            inputs,
        } = payload
        {
            self.nodes.extend(nodes.iter().copied());
            self.links.extend(links.iter().copied());
            self.unreliable.extend(unreliable.iter().copied());
            for p in inputs {
                self.inputs.insert(p.name, p.input);
            }
        }
    }

    fn survey_check(&mut self) -> Verdict {
        if self.unsettled().is_empty() {
            self.phase = Phase::FinalSend;
            let best = self.inputs.values().copied().max().expect("own input present");
            Verdict::DecideAfterEmit(best)
        } else {
            self.phase = Phase::Survey;
            Verdict::Continue
        }
    }
}

impl Automaton for EsNode {
    fn emit(&mut self, _round: Round) -> Vec<Outgoing> {
        match self.phase {
            Phase::Discovery => (0..self.degree)
                .map(|port| Outgoing {
                    port,
                    payload: Payload::Name { name: self.name },
                })
                .collect(),
            Phase::Survey | Phase::FinalSend => {
                let snap = self.snapshot();
                if self.phase == Phase::FinalSend {
                    self.phase = Phase::Halted;
                }
                self.neighbor_of_port
                    .keys()
                    .map(|&port| Outgoing {
                        port,
                        payload: snap.clone(),
                    })
                    .collect()
            }
            Phase::Halted => Vec::new(),
        }
    }

    fn absorb(&mut self, _round: Round, inbox: &[Incoming]) -> Verdict {
        match self.phase {
            Phase::Discovery => {
                for m in inbox {
                    if let Payload::Name { name } = m.payload {
                        self.neighbor_of_port.insert(m.port, name);
                        self.nodes.insert(name);
                        if let Ok(l) = Link::new(self.name, name) {
                            self.links.insert(l);
                        }
                    }
                }
                self.survey_check()
            }
            Phase::Survey => {
                let heard: BTreeSet<Port> = inbox.iter().map(|m| m.port).collect();
                for m in inbox {
                    self.merge(&m.payload);
                }
                for (port, &q) in &self.neighbor_of_port {
                    if !heard.contains(port) {
                        if let Ok(l) = Link::new(self.name, q) {
                            self.unreliable.insert(l);
                        }
                    }
                }
                self.survey_check()
            }
            Phase::FinalSend | Phase::Halted => Verdict::Continue,
        }
    }
}
