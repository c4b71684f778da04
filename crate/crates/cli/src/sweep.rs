//! Parameter sweeps: algorithms × topologies × adversaries × seeds.

use std::io::Write;

use linkcons::checker::verify;
use linkcons::engine::{metrics, run_to_completion, RunStatus, Scenario};
use linkcons::{AlgorithmSpec, BoundProfile, Round};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scenario::{parse_toml, AdversaryDoc, AlgorithmDoc, InputsDoc, ScenarioError, TopologyDoc};
use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    #[serde(default)]
    pub algorithms: Vec<AlgorithmDoc>,
    #[serde(default)]
    pub topologies: Vec<TopologyDoc>,
    /// An empty list means a single failure-free adversary.
    #[serde(default)]
    pub adversaries: Vec<AdversaryDoc>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub inputs: InputsDoc,
    pub round_limit: Option<Round>,
}

/// One run of the cross product, before execution.
#[derive(Clone, Debug)]
pub struct SweepJob {
    pub topology: String,
    pub adversary: String,
    pub scenario: Scenario,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub topology: String,
    pub adversary: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    /// Λ for `fast`, otherwise λ of the final graph.
    pub lambda: u64,
    pub status: String,
    pub halt_round: Option<Round>,
    pub max_message_bits: u64,
    pub used_links: usize,
    pub concurrent_links_max: usize,
    /// `ok`, or the violated properties joined by `;`.
    pub verdicts: String,
}

/// Expands the cross product in file order, then by seed. Any invalid
/// combination aborts the whole sweep.
pub fn expand(doc: &SweepDoc) -> Result<Vec<SweepJob>, ScenarioError> {
    let none = AdversaryDoc {
        strategy: "none".into(),
        ..AdversaryDoc::default()
    };
    let adversaries: Vec<&AdversaryDoc> = if doc.adversaries.is_empty() {
        vec![&none]
    } else {
        doc.adversaries.iter().collect()
    };
    let mut jobs = Vec::new();
    for alg in &doc.algorithms {
        let algorithm = alg.resolve()?;
        for topo in &doc.topologies {
            for adv in &adversaries {
                for &seed in &doc.seeds {
                    let graph = topo.build(seed)?;
                    let inputs = doc.inputs.resolve(&graph, seed)?;
                    let adversary = adv.resolve(&graph, seed)?;
                    let mut scenario = Scenario::new(graph, inputs, algorithm)
                        .with_adversary(adversary)
                        .with_seed(seed);
                    if let Some(limit) = doc.round_limit {
                        scenario = scenario.with_round_limit(limit);
                    }
                    jobs.push(SweepJob {
                        topology: topo.label(),
                        adversary: adv.label(),
                        scenario,
                    });
                }
            }
        }
    }
    Ok(jobs)
}

pub fn profile_for(alg: &AlgorithmSpec) -> BoundProfile {
    alg.id().parse().expect("every algorithm id names a bound profile")
}

pub fn run_job(job: &SweepJob) -> Result<SweepRow, CliError> {
    let trace = run_to_completion(&job.scenario)?;
    let report = metrics(&trace);
    let profile = profile_for(&job.scenario.algorithm);
    let violations = verify(&trace, profile).map_err(CliError::Usage)?;
    let mut kinds: Vec<String> = violations
        .iter()
        .map(|v| format!("{:?}", v.kind).to_lowercase())
        .collect();
    kinds.dedup();
    let lambda = match job.scenario.algorithm {
        AlgorithmSpec::Fast { lambda } => lambda,
        _ => report.lambda as u64,
    };
    Ok(SweepRow {
        algorithm: job.scenario.algorithm.id().to_string(),
        topology: job.topology.clone(),
        adversary: job.adversary.clone(),
        seed: job.scenario.seed,
        n: report.n,
        m: report.m,
        lambda,
        status: match trace.status {
            RunStatus::Completed => "completed".into(),
            RunStatus::TimedOut => "timed-out".into(),
        },
        halt_round: report.halt_round,
        max_message_bits: report.max_message_bits,
        used_links: report.used_links,
        concurrent_links_max: report.concurrent_links_max,
        verdicts: if kinds.is_empty() { "ok".into() } else { kinds.join(";") },
    })
}

/// Runs every job, in parallel when `threads` > 1. Rows come back in job
/// order whatever the completion order.
pub fn run_sweep(jobs: &[SweepJob], threads: usize) -> Result<Vec<SweepRow>, CliError> {
    if threads <= 1 {
        return jobs.iter().map(run_job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(run_job).collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "algorithm",
        "topology",
        "adversary",
        "seed",
        "n",
        "m",
        "lambda",
        "status",
        "halt_round",
        "max_message_bits",
        "used_links",
        "concurrent_links_max",
        "verdicts",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_sweep(text: &str) -> Result<SweepDoc, ScenarioError> {
    parse_toml(text)
}
