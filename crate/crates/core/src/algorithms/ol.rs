//! Link-economical consensus.
//!
//! Each node keeps its incident links in three categories. Only active links
//! carry traffic. Nodes gossip timestamped copies of their states over active
//! links, grow the active component one connector at a time, and decide once
//! their settled active component has no outgoing passive link left.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{broadcast, decision_relay, Automaton, Incoming, NodeContext, Outgoing, Verdict};
use crate::netgraph::{Link, NodeId, Port};
use crate::payload::{NodeState, Payload, StampedState};
use crate::{Round, Value};

#[derive(Clone, Debug)]
pub struct OlNode {
    name: NodeId,
    input: Value,
    neighbors: Vec<NodeId>,
    port_of: BTreeMap<NodeId, Port>,
    active: BTreeSet<NodeId>,
    passive: BTreeSet<NodeId>,
    unreliable: BTreeSet<NodeId>,
    /// Round at which this node activated a link on its own; links activated
    /// by an arrival are not listed and count as mature.
    self_activated: BTreeMap<NodeId, Round>,
    timestamps: BTreeMap<NodeId, StampedState>,
    snapshot: BTreeMap<NodeId, StampedState>,
    counter: Round,
    epoch: Round,
    epochs: usize,
    pending: Option<Vec<Outgoing>>,
}

/// Derived view of one snapshot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentView {
    pub component: BTreeSet<NodeId>,
    pub settled: bool,
    pub outgoing: BTreeSet<Link>,
}

impl ComponentView {
    pub fn connector(&self) -> Option<Link> {
        self.outgoing.iter().next().copied()
    }
}

/// Computes the active component of `me` in `snapshot`, whether it is
/// settled, and its outgoing links.
pub fn component_view(me: NodeId, snapshot: &BTreeMap<NodeId, StampedState>) -> ComponentView {
    let pair = |a: NodeId, b: NodeId| Link::new(a, b).ok();
    let failed: BTreeSet<Link> = snapshot
        .values()
        .flat_map(|s| s.state.unreliable.iter().filter_map(|&q| pair(s.state.name, q)))
        .collect();
    let active: BTreeSet<Link> = snapshot
        .values()
        .flat_map(|s| s.state.active.iter().filter_map(|&q| pair(s.state.name, q)))
        .filter(|l| !failed.contains(l))
        .collect();
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for l in &active {
        adj.entry(l.lo()).or_default().push(l.hi());
        adj.entry(l.hi()).or_default().push(l.lo());
    }
    let mut component = BTreeSet::from([me]);
    let mut queue = VecDeque::from([me]);
    while let Some(u) = queue.pop_front() {
        for &v in adj.get(&u).into_iter().flatten() {
            if component.insert(v) {
                queue.push_back(v);
            }
        }
    }
    let settled = component.iter().all(|q| snapshot.contains_key(q));
    let mut outgoing = BTreeSet::new();
    if settled {
        for r in &component {
            let st = &snapshot[r].state;
            for &q in &st.passive {
                if component.contains(&q) {
                    continue;
                }
                if let Some(l) = pair(*r, q) {
                    if !active.contains(&l) && !failed.contains(&l) {
                        outgoing.insert(l);
                    }
                }
            }
        }
    }
    ComponentView {
        component,
        settled,
        outgoing,
    }
}

impl OlNode {
    pub fn new(ctx: &NodeContext) -> Self {
        let neighbors = ctx.neighbors.clone();
        let port_of = neighbors.iter().enumerate().map(|(p, &q)| (q, p)).collect();
        let mut passive: BTreeSet<NodeId> = neighbors.iter().copied().collect();
        let mut active = BTreeSet::new();
        let mut self_activated = BTreeMap::new();
        if let Some(&first) = passive.iter().next() {
            passive.remove(&first);
            active.insert(first);
            self_activated.insert(first, 0);
        }
        let mut node = OlNode {
            name: ctx.name,
            input: ctx.input,
            neighbors,
            port_of,
            active,
            passive,
            unreliable: BTreeSet::new(),
            self_activated,
            timestamps: BTreeMap::new(),
            snapshot: BTreeMap::new(),
            counter: 0,
            epoch: 0,
            epochs: 0,
            pending: None,
        };
        node.begin_epoch();
        node
    }

    pub fn state(&self) -> NodeState {
        NodeState {
            name: self.name,
            input: self.input,
            active: self.active.clone(),
            passive: self.passive.clone(),
            unreliable: self.unreliable.clone(),
        }
    }

    pub fn active(&self) -> &BTreeSet<NodeId> {
        &self.active
    }

    pub fn passive(&self) -> &BTreeSet<NodeId> {
        &self.passive
    }

    pub fn unreliable(&self) -> &BTreeSet<NodeId> {
        &self.unreliable
    }

    pub fn snapshot(&self) -> &BTreeMap<NodeId, StampedState> {
        &self.snapshot
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    fn stamped(&self) -> StampedState {
        StampedState {
            state: self.state(),
            timestamp: self.counter,
        }
    }

    fn begin_epoch(&mut self) {
        self.epoch = self.counter;
        self.snapshot.clear();
        self.snapshot.insert(self.name, self.stamped());
        self.epochs += 1;
    }

    fn active_ports(&self) -> Vec<Port> {
        self.active.iter().map(|q| self.port_of[q]).collect()
    }

    fn mature(&self, q: NodeId) -> bool {
        self.self_activated.get(&q).is_none_or(|&i| self.counter >= i + 2)
    }

    fn activate_on_arrival(&mut self, q: NodeId) {
        if self.passive.remove(&q) {
            self.active.insert(q);
        }
        self.self_activated.remove(&q);
    }

    fn good_update(map: &mut BTreeMap<NodeId, StampedState>, s: &StampedState) -> bool {
        match map.get(&s.state.name) {
            Some(old) if old.timestamp >= s.timestamp => false,
            _ => {
                map.insert(s.state.name, s.clone());
                true
            }
        }
    }
}

impl Automaton for OlNode {
    fn start(&mut self) -> Verdict {
        if self.neighbors.is_empty() {
            Verdict::Decide(self.input)
        } else {
            Verdict::Continue
        }
    }

    fn emit(&mut self, _round: Round) -> Vec<Outgoing> {
        if let Some(out) = self.pending.take() {
            return out;
        }
        self.counter += 1;
        let own = self.stamped();
        self.timestamps.insert(self.name, own);
        let entries: Vec<StampedState> = self.timestamps.values().cloned().collect();
        broadcast(self.active_ports(), &Payload::States { entries })
    }

    fn absorb(&mut self, _round: Round, inbox: &[Incoming]) -> Verdict {
        let heard: BTreeSet<NodeId> = inbox.iter().map(|m| self.neighbors[m.port]).collect();
        // an arrival activates its link even in the round a decision shows up,
        // so the relay reaches that sender too
        for &q in &heard {
            self.activate_on_arrival(q);
        }
        if let Some((out, z)) = decision_relay(inbox, self.active_ports()) {
            self.pending = Some(out);
            return Verdict::DecideAfterEmit(z);
        }
        for q in self.neighbors.clone() {
            if self.active.contains(&q) && self.mature(q) && !heard.contains(&q) {
                self.active.remove(&q);
                self.unreliable.insert(q);
                self.self_activated.remove(&q);
            }
        }
        for m in inbox {
            if let Payload::States { entries } = &m.payload {
                for s in entries {
                    if s.state.name == self.name {
                        continue;
                    }
                    Self::good_update(&mut self.timestamps, s);
                    if s.timestamp > self.epoch {
                        Self::good_update(&mut self.snapshot, s);
                    }
                }
            }
        }
        let own = self.stamped();
        self.snapshot.insert(self.name, own);

        let view = component_view(self.name, &self.snapshot);
        if !view.settled {
            return Verdict::Continue;
        }
        match view.connector() {
            Some(c) => {
                if let Some(q) = c.other(self.name) {
                    if self.passive.remove(&q) {
                        self.active.insert(q);
                        self.self_activated.insert(q, self.counter);
                    }
                }
                self.begin_epoch();
                Verdict::Continue
            }
            None => {
                // the snapshot may still hold states of nodes that left the
                // active component; only members count
                let best = view
                    .component
                    .iter()
                    .map(|q| self.snapshot[q].state.input)
                    .max()
                    .unwrap_or(self.input);
                self.pending = Some(broadcast(self.active_ports(), &Payload::Decision { value: best }));
                Verdict::DecideAfterEmit(best)
            }
        }
    }
}
