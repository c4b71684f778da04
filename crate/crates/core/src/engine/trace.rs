//! Line-delimited JSON trace format.
//!
//! The first line is a header record, then one record per round, then an end
//! record. Field order follows struct declaration order, so identical traces
//! serialize to identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Decision, ExecutionTrace, RoundOutcome, RunStatus, TraceHeader};
use crate::netgraph::{DynamicGraph, NodeId};
use crate::Value;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {msg}")]
    Structure { line: usize, msg: String },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum Record {
    Header {
        header: TraceHeader,
        initial_graph: DynamicGraph,
        inputs: BTreeMap<NodeId, Value>,
    },
    Round(RoundOutcome),
    End {
        status: RunStatus,
        decisions: BTreeMap<NodeId, Decision>,
        final_graph: DynamicGraph,
    },
}

pub fn to_lines(trace: &ExecutionTrace) -> String {
    let mut out = String::new();
    let mut push = |rec: &Record| {
        out.push_str(&serde_json::to_string(rec).expect("trace records always serialize"));
        out.push('\n');
    };
    push(&Record::Header {
        header: trace.header.clone(),
        initial_graph: trace.initial_graph.clone(),
        inputs: trace.inputs.clone(),
    });
    for r in &trace.rounds {
        push(&Record::Round(r.clone()));
    }
    push(&Record::End {
        status: trace.status,
        decisions: trace.decisions.clone(),
        final_graph: trace.final_graph.clone(),
    });
    out
}

pub fn from_lines(text: &str) -> Result<ExecutionTrace, TraceError> {
    let mut header = None;
    let mut rounds = Vec::new();
    let mut end = None;
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        if line.trim().is_empty() {
            continue;
        }
        let structure = |msg: &str| TraceError::Structure {
            line: line_no,
            msg: msg.to_string(),
        };
        if end.is_some() {
            return Err(structure("content after end record"));
        }
        let rec: Record = serde_json::from_str(line).map_err(|source| TraceError::Json { line: line_no, source })?;
        match rec {
            Record::Header {
                header: h,
                initial_graph,
                inputs,
            } => {
                if header.is_some() {
                    return Err(structure("duplicate header record"));
                }
                header = Some((h, initial_graph, inputs));
            }
            Record::Round(r) => {
                if header.is_none() {
                    return Err(structure("round record before header"));
                }
                if r.round != rounds.len() as u64 + 1 {
                    return Err(structure("round records out of sequence"));
                }
                if r.dropped.iter().any(|&d| d >= r.sent.len()) {
                    return Err(structure("dropped index out of range"));
                }
                rounds.push(r);
            }
            Record::End {
                status,
                decisions,
                final_graph,
            } => {
                if header.is_none() {
                    return Err(structure("end record before header"));
                }
                end = Some((status, decisions, final_graph));
            }
        }
    }
    let (header, initial_graph, inputs) = header.ok_or(TraceError::Structure {
        line: last_line,
        msg: "missing header record".into(),
    })?;
    let (status, decisions, final_graph) = end.ok_or(TraceError::Structure {
        line: last_line,
        msg: "missing end record".into(),
    })?;
    Ok(ExecutionTrace {
        header,
        initial_graph,
        inputs,
        rounds,
        decisions,
        final_graph,
        status,
    })
}
