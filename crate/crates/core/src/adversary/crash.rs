//! Link crashes on a fixed schedule.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Adversary, AdversaryVerdict, EnvelopeKey};
use crate::engine::{EngineError, MessageEnvelope};
use crate::netgraph::{DynamicGraph, Link};
use crate::Round;

/// Round → links that stop delivering from that round on. Serialized as a
/// list of `{round, links}` entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<CrashEntry>", from = "Vec<CrashEntry>")]
pub struct CrashSchedule {
    pub entries: BTreeMap<Round, BTreeSet<Link>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CrashEntry {
    round: Round,
    links: BTreeSet<Link>,
}

impl From<CrashSchedule> for Vec<CrashEntry> {
    fn from(s: CrashSchedule) -> Self {
        s.entries
            .into_iter()
            .map(|(round, links)| CrashEntry { round, links })
            .collect()
    }
}

impl From<Vec<CrashEntry>> for CrashSchedule {
    fn from(v: Vec<CrashEntry>) -> Self {
        let mut s = CrashSchedule::new();
        for e in v {
            s.entries.entry(e.round).or_default().extend(e.links);
        }
        s
    }
}

impl CrashSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, round: Round, link: Link) -> &mut Self {
        self.entries.entry(round).or_default().insert(link);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(BTreeSet::is_empty)
    }

    /// Earliest scheduled crash round of `link`.
    pub fn crash_round(&self, link: &Link) -> Option<Round> {
        self.entries.iter().find(|(_, ls)| ls.contains(link)).map(|(&r, _)| r)
    }

    pub fn links(&self) -> BTreeSet<Link> {
        self.entries.values().flatten().copied().collect()
    }

    pub fn validate(&self, graph: &DynamicGraph) -> Result<(), EngineError> {
        for l in self.entries.values().flatten() {
            if !graph.links().contains(l) {
                return Err(EngineError::InvalidScenario(format!(
                    "crash schedule names link {l} which is not in the topology"
                )));
            }
        }
        Ok(())
    }

    /// `graph` with every scheduled link failed.
    pub fn apply_all(&self, graph: &DynamicGraph) -> Result<DynamicGraph, EngineError> {
        let mut g = graph.clone();
        for l in self.entries.values().flatten() {
            g.fail_link(*l)?;
        }
        Ok(g)
    }
}

pub fn crash_decide(schedule: &CrashSchedule, envelope: &MessageEnvelope, round: Round) -> AdversaryVerdict {
    match schedule.crash_round(&envelope.link) {
        Some(r) if r <= round => AdversaryVerdict::Drop,
        _ => AdversaryVerdict::Deliver,
    }
}

#[derive(Clone, Debug)]
pub struct CrashAdversary {
    schedule: CrashSchedule,
}

impl CrashAdversary {
    pub fn new(schedule: &CrashSchedule, graph: &DynamicGraph) -> Result<Self, EngineError> {
        schedule.validate(graph)?;
        Ok(CrashAdversary {
            schedule: schedule.clone(),
        })
    }
}

impl Adversary for CrashAdversary {
    fn adjudicate(
        &mut self,
        _graph: &DynamicGraph,
        round: Round,
        envelopes: &[MessageEnvelope],
    ) -> Result<Vec<EnvelopeKey>, EngineError> {
        Ok(envelopes
            .iter()
            .filter(|e| crash_decide(&self.schedule, e, round) == AdversaryVerdict::Drop)
            .map(MessageEnvelope::key)
            .collect())
    }
}

/// Picks up to `max_crashes` distinct links and gives each a crash round in
/// `1..=max_round`. The number of crashes is itself uniform in
/// `0..=max_crashes`.
pub fn random_schedule(graph: &DynamicGraph, seed: u64, max_crashes: usize, max_round: Round) -> CrashSchedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links: Vec<Link> = graph.links().iter().copied().collect();
    links.shuffle(&mut rng);
    let count = rng.gen_range(0..=max_crashes.min(links.len()));
    let mut schedule = CrashSchedule::new();
    for l in links.into_iter().take(count) {
        schedule.add(rng.gen_range(1..=max_round.max(1)), l);
    }
    schedule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::NodeId;
    use crate::payload::Payload;

    fn env(link: Link, round: Round) -> MessageEnvelope {
        MessageEnvelope {
            link,
            from: link.lo(),
            to: link.hi(),
            round,
            bit_size: 9,
            payload: Payload::Decision { value: 0 },
        }
    }

    #[test]
    fn drop_from_scheduled_round_on() {
        let l = Link::new(NodeId(0), NodeId(1)).unwrap();
        let mut s = CrashSchedule::new();
        s.add(3, l);
        assert_eq!(crash_decide(&s, &env(l, 2), 2), AdversaryVerdict::Deliver);
        assert_eq!(crash_decide(&s, &env(l, 3), 3), AdversaryVerdict::Drop);
        assert_eq!(crash_decide(&s, &env(l, 9), 9), AdversaryVerdict::Drop);
        let empty = CrashSchedule::new();
        assert_eq!(crash_decide(&empty, &env(l, 1), 1), AdversaryVerdict::Deliver);
    }

    #[test]
    fn rejects_foreign_links() {
        let g = DynamicGraph::from_edges([(0, 1)]).unwrap();
        let mut s = CrashSchedule::new();
        s.add(1, Link::new(NodeId(0), NodeId(2)).unwrap());
        assert!(s.validate(&g).is_err());
    }

    #[test]
    fn random_schedule_is_deterministic() {
        let g = DynamicGraph::from_edges([(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let a = random_schedule(&g, 7, 3, 5);
        assert_eq!(a, random_schedule(&g, 7, 3, 5));
        assert!(a.validate(&g).is_ok());
        assert!(a.links().len() <= 3);
    }
}
