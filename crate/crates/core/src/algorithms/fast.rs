//! Flooding with a known stretch bound: every node floods the largest value
//! it has seen and decides after a fixed number of rounds.

use super::{broadcast, Automaton, Incoming, NodeContext, Outgoing, Verdict};
use crate::payload::Payload;
use crate::{Round, Value};

#[derive(Clone, Debug)]
pub struct FastNode {
    bound: Round,
    degree: usize,
    candidate: Value,
    last_sent: Option<Value>,
}

impl FastNode {
    pub fn new(ctx: &NodeContext, bound: Round) -> Self {
        FastNode {
            bound,
            degree: ctx.degree(),
            candidate: ctx.input,
            last_sent: None,
        }
    }

    pub fn candidate(&self) -> Value {
        self.candidate
    }
}

impl Automaton for FastNode {
    fn start(&mut self) -> Verdict {
        if self.bound == 0 {
            Verdict::Decide(self.candidate)
        } else {
            Verdict::Continue
        }
    }

    fn emit(&mut self, _round: Round) -> Vec<Outgoing> {
        if self.last_sent == Some(self.candidate) {
            return Vec::new();
        }
        self.last_sent = Some(self.candidate);
        broadcast(0..self.degree, &Payload::Candidate { value: self.candidate })
    }

    fn absorb(&mut self, round: Round, inbox: &[Incoming]) -> Verdict {
        for m in inbox {
            if let Payload::Candidate { value } = m.payload {
                self.candidate = self.candidate.max(value);
            }
        }
        if round >= self.bound {
            Verdict::Decide(self.candidate)
        } else {
            Verdict::Continue
        }
    }
}
