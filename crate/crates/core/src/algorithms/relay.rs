//! Forwarding of decision messages.

use super::{broadcast, Incoming, Outgoing};
use crate::netgraph::Port;
use crate::payload::Payload;
use crate::Value;

/// If any decision arrived, returns the forwarding outbox over `ports` and
/// the value to decide. Several distinct decisions in one inbox resolve to
/// the largest.
pub fn decision_relay(inbox: &[Incoming], ports: impl IntoIterator<Item = Port>) -> Option<(Vec<Outgoing>, Value)> {
    let z = inbox
        .iter()
        .filter_map(|m| match m.payload {
            Payload::Decision { value } => Some(value),
            _ => None,
        })
        .max()?;
    Some((broadcast(ports, &Payload::Decision { value: z }), z))
}
