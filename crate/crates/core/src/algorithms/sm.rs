//! Short-message consensus: input pairs trickle through each port one per
//! round until the local round counter exceeds the number of pairs known.

use std::collections::BTreeSet;

use super::{Automaton, Incoming, NodeContext, Outgoing, Verdict};
use crate::payload::{InputPair, Payload};
use crate::{Round, Value};

#[derive(Clone, Debug)]
pub struct SmNode {
    own: InputPair,
    inputs: Vec<InputPair>,
    channel: Vec<BTreeSet<InputPair>>,
    counter: Round,
}

impl SmNode {
    pub fn new(ctx: &NodeContext) -> Self {
        let own = InputPair {
            name: ctx.name,
            input: ctx.input,
        };
        SmNode {
            own,
            inputs: vec![own],
            channel: vec![BTreeSet::new(); ctx.degree()],
            counter: 1,
        }
    }

    pub fn inputs(&self) -> &[InputPair] {
        &self.inputs
    }

    pub fn channel(&self, port: usize) -> &BTreeSet<InputPair> {
        &self.channel[port]
    }

    fn receive(&mut self, inbox: &[Incoming]) {
        for m in inbox {
            if let Payload::Input { pair } = m.payload {
                self.channel[m.port].insert(pair);
                if !self.inputs.contains(&pair) {
                    self.inputs.push(pair);
                }
            }
        }
    }

    fn decision(&self) -> Value {
        self.inputs.iter().map(|p| p.input).max().unwrap_or(self.own.input)
    }
}

impl Automaton for SmNode {
    fn emit(&mut self, round: Round) -> Vec<Outgoing> {
        let mut out = Vec::new();
        for (port, chan) in self.channel.iter_mut().enumerate() {
            let next = if round == 1 {
                Some(self.own)
            } else {
                self.inputs.iter().find(|p| !chan.contains(p)).copied()
            };
            if let Some(pair) = next {
                chan.insert(pair);
                out.push(Outgoing {
                    port,
                    payload: Payload::Input { pair },
                });
            }
        }
        out
    }

    fn absorb(&mut self, round: Round, inbox: &[Incoming]) -> Verdict {
        self.receive(inbox);
        if round == 1 {
            return Verdict::Continue;
        }
        self.counter += 1;
        if self.counter > self.inputs.len() as Round {
            Verdict::Decide(self.decision())
        } else {
            Verdict::Continue
        }
    }
}
