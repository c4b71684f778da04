//! Early-stopping consensus with linear-size messages.
//!
//! Nodes flood timestamp pairs every round. Each node runs its own epochs:
//! an epoch ends at the first round in which no node became valid and no
//! range changed, and the node decides once two consecutive epochs end with
//! the same set of heard-of nodes.

use std::collections::{BTreeMap, BTreeSet};

use super::{broadcast, decision_relay, Automaton, Incoming, NodeContext, Outgoing, Verdict};
use crate::netgraph::NodeId;
use crate::payload::{Payload, TimestampPair};
use crate::{Round, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Absent,
    Valid,
    Expired,
}

#[derive(Clone, Debug)]
pub struct LmNode {
    name: NodeId,
    degree: usize,
    candidate: Value,
    counter: Round,
    epoch: Round,
    timestamps: BTreeMap<NodeId, Round>,
    epoch_timestamps: BTreeMap<NodeId, Round>,
    /// `None` stands for the "no set yet" marker.
    nodes: Option<BTreeSet<NodeId>>,
    previous_nodes: Option<BTreeSet<NodeId>>,
    ranges: BTreeMap<NodeId, Round>,
    status: BTreeMap<NodeId, Status>,
    epochs: usize,
    fresh_this_round: bool,
    pending: Option<Vec<Outgoing>>,
}

impl LmNode {
    pub fn new(ctx: &NodeContext) -> Self {
        let mut node = LmNode {
            name: ctx.name,
            degree: ctx.degree(),
            candidate: ctx.input,
            counter: 0,
            epoch: 0,
            timestamps: BTreeMap::new(),
            epoch_timestamps: BTreeMap::new(),
            nodes: None,
            previous_nodes: None,
            ranges: BTreeMap::new(),
            status: BTreeMap::new(),
            epochs: 0,
            fresh_this_round: false,
            pending: None,
        };
        node.begin_epoch();
        node
    }

    fn begin_epoch(&mut self) {
        self.epoch = self.counter;
        self.previous_nodes = self.nodes.clone();
        self.epoch_timestamps.clear();
        self.ranges.clear();
        self.status.clear();
        self.epochs += 1;
    }

    /// Number of epochs started so far.
    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn epoch(&self) -> Round {
        self.epoch
    }

    pub fn candidate(&self) -> Value {
        self.candidate
    }

    pub fn timestamps(&self) -> &BTreeMap<NodeId, Round> {
        &self.timestamps
    }

    pub fn epoch_timestamps(&self) -> &BTreeMap<NodeId, Round> {
        &self.epoch_timestamps
    }

    pub fn ranges(&self) -> &BTreeMap<NodeId, Round> {
        &self.ranges
    }

    pub fn status(&self, q: NodeId) -> Status {
        self.status.get(&q).copied().unwrap_or(Status::Absent)
    }

    fn announce(&mut self, value: Value) -> Verdict {
        self.pending = Some(broadcast(0..self.degree, &Payload::Decision { value }));
        Verdict::DecideAfterEmit(value)
    }
}

impl Automaton for LmNode {
    fn emit(&mut self, _round: Round) -> Vec<Outgoing> {
        if let Some(out) = self.pending.take() {
            return out;
        }
        self.counter += 1;
        for s in self.status.values_mut() {
            *s = Status::Expired;
        }
        self.timestamps.insert(self.name, self.counter);
        let prior = self.epoch_timestamps.insert(self.name, self.counter);
        self.fresh_this_round = prior.is_none();
        self.status.insert(self.name, Status::Valid);
        let timestamps = self
            .timestamps
            .iter()
            .map(|(&name, &timestamp)| TimestampPair { name, timestamp })
            .collect();
        broadcast(
            0..self.degree,
            &Payload::Probe {
                timestamps,
                candidate: self.candidate,
            },
        )
    }

    fn absorb(&mut self, _round: Round, inbox: &[Incoming]) -> Verdict {
        if let Some((out, z)) = decision_relay(inbox, 0..self.degree) {
            self.pending = Some(out);
            return Verdict::DecideAfterEmit(z);
        }
        let mut became_valid = self.fresh_this_round;
        let old_ranges = self.ranges.clone();
        let mut touched = BTreeSet::new();
        for m in inbox {
            let Payload::Probe { timestamps, candidate } = &m.payload else {
                continue;
            };
            self.candidate = self.candidate.max(*candidate);
            for tp in timestamps {
                let (q, y) = (tp.name, tp.timestamp);
                if self.timestamps.get(&q).is_none_or(|&old| y > old) {
                    self.timestamps.insert(q, y);
                }
                if y <= self.epoch {
                    continue;
                }
                match self.epoch_timestamps.get(&q) {
                    None => {
                        became_valid = true;
                    }
                    Some(&old) if y > old => {}
                    Some(_) => continue,
                }
                self.epoch_timestamps.insert(q, y);
                self.status.insert(q, Status::Valid);
                self.ranges.insert(q, self.counter - y);
                touched.insert(q);
            }
        }
        let range_changed = touched
            .iter()
            .any(|q| matches!(old_ranges.get(q), Some(r) if Some(r) != self.ranges.get(q)));
        if became_valid || range_changed {
            return Verdict::Continue;
        }
        self.nodes = Some(self.epoch_timestamps.keys().copied().collect());
        if self.nodes == self.previous_nodes {
            return self.announce(self.candidate);
        }
        self.begin_epoch();
        Verdict::Continue
    }
}
