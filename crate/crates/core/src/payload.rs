//! Message payloads and their canonical bit sizes.
//!
//! Every payload is encoded as an 8-bit variant tag followed by its fields.
//! Names take `id` bits, input values `val` bits and timestamps `ts` bits;
//! every collection carries a 16-bit element count in front.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::netgraph::{Link, NodeId};
use crate::{Round, Value};

pub const TAG_BITS: u64 = 8;
pub const COUNT_BITS: u64 = 16;

/// Field widths used for bit accounting in one execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitWidths {
    pub id: u64,
    pub val: u64,
    pub ts: u64,
}

/// Number of bits needed to write `x` in binary, at least 1.
pub fn width_of(x: u64) -> u64 {
    (64 - u64::from(x.leading_zeros())).max(1)
}

impl BitWidths {
    pub fn new(max_name: NodeId, max_input: Value, round_limit: Round) -> Self {
        BitWidths {
            id: width_of(u64::from(max_name.0)),
            val: width_of(max_input),
            ts: width_of(round_limit),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InputPair {
    pub name: NodeId,
    pub input: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimestampPair {
    pub name: NodeId,
    pub timestamp: Round,
}

/// A node's public state in the link-economical protocol: its name, input and
/// the categories of its incident links, each link named by the neighbor at
/// its other end.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeState {
    pub name: NodeId,
    pub input: Value,
    pub active: BTreeSet<NodeId>,
    pub passive: BTreeSet<NodeId>,
    pub unreliable: BTreeSet<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StampedState {
    pub state: NodeState,
    pub timestamp: Round,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    /// Current candidate value (fast flooding).
    Candidate { value: Value },
    /// A single input pair.
    Input { pair: InputPair },
    /// Timestamp set plus the candidate value.
    Probe {
        timestamps: Vec<TimestampPair>,
        candidate: Value,
    },
    /// Final decision being forwarded.
    Decision { value: Value },
    /// Sender's own name, used to learn port bindings.
    Name { name: NodeId },
    /// Full local view: known nodes, links, failed links and input pairs.
    Snapshot {
        nodes: Vec<NodeId>,
        links: Vec<Link>,
        unreliable: Vec<Link>,
        inputs: Vec<InputPair>,
    },
    /// Timestamped node states.
    States { entries: Vec<StampedState> },
}

impl Payload {
    /// Stable class name, used to group message statistics.
    pub fn class(&self) -> &'static str {
        match self {
            Payload::Candidate { .. } => "candidate",
            Payload::Input { .. } => "input",
            Payload::Probe { .. } => "probe",
            Payload::Decision { .. } => "decision",
            Payload::Name { .. } => "name",
            Payload::Snapshot { .. } => "snapshot",
            Payload::States { .. } => "states",
        }
    }

    pub fn bit_size(&self, w: &BitWidths) -> u64 {
        let n = |len: usize| len as u64;
        TAG_BITS
            + match self {
                Payload::Candidate { .. } | Payload::Decision { .. } => w.val,
                Payload::Input { .. } => w.id + w.val,
                Payload::Probe { timestamps, .. } => COUNT_BITS + n(timestamps.len()) * (w.id + w.ts) + w.val,
                Payload::Name { .. } => w.id,
                Payload::Snapshot {
                    nodes,
                    links,
                    unreliable,
                    inputs,
                } => {
                    4 * COUNT_BITS
                        + n(nodes.len()) * w.id
                        + n(links.len() + unreliable.len()) * 2 * w.id
                        + n(inputs.len()) * (w.id + w.val)
                }
                Payload::States { entries } => {
                    COUNT_BITS + entries.iter().map(|e| state_bits(&e.state, w) + w.ts).sum::<u64>()
                }
            }
    }
}

fn state_bits(s: &NodeState, w: &BitWidths) -> u64 {
    let links = s.active.len() + s.passive.len() + s.unreliable.len();
    w.id + w.val + 3 * COUNT_BITS + links as u64 * w.id
}
