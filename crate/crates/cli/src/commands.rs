//! Subcommand bodies. Each returns the process exit code on success paths
//! and a [`CliError`] for IO, parse and usage failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use linkcons::checker::verify;
use linkcons::engine::{from_lines, metrics, run_to_completion, to_lines, RunStatus};
use linkcons::netgraph::to_edge_list;
use linkcons::BoundProfile;
use log::{info, warn};

use crate::scenario::{parse_scenario, TopologyDoc};
use crate::sweep::{expand, parse_sweep, run_sweep, write_csv};
use crate::{exit, CliError};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `<out>.metrics.json`, next to the trace.
pub fn metrics_path(out: &Path) -> PathBuf {
    let mut name: OsString = out.as_os_str().to_owned();
    name.push(".metrics.json");
    PathBuf::from(name)
}

pub fn simulate(scenario: &Path, out: &Path, seed: Option<u64>) -> Result<i32, CliError> {
    let text = read(scenario)?;
    let sc = parse_scenario(&text, seed).map_err(|source| CliError::Scenario {
        path: scenario.to_path_buf(),
        source,
    })?;
    info!(
        "running {} on {} nodes / {} links, limit {}",
        sc.algorithm,
        sc.graph.node_count(),
        sc.graph.link_count(),
        sc.round_limit
    );
    let trace = run_to_completion(&sc)?;
    let report = metrics(&trace);
    write(out, &to_lines(&trace))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    write(&metrics_path(out), &json)?;
    match trace.status {
        RunStatus::Completed => {
            info!("all nodes decided by round {}", report.halt_round.unwrap_or(0));
            Ok(exit::OK)
        }
        RunStatus::TimedOut => {
            warn!("round limit {} reached with undecided nodes", sc.round_limit);
            Ok(exit::TIMEOUT)
        }
    }
}

/// Prints one line per violation to `report`.
pub fn verify_trace(trace: &Path, profile: BoundProfile, report: &mut dyn Write) -> Result<i32, CliError> {
    let text = read(trace)?;
    let t = from_lines(&text).map_err(|source| CliError::Trace {
        path: trace.to_path_buf(),
        source,
    })?;
    let violations = verify(&t, profile).map_err(CliError::Usage)?;
    let out = |e: std::io::Error| CliError::Output(e.to_string());
    for v in &violations {
        writeln!(report, "{v}").map_err(out)?;
    }
    if violations.is_empty() {
        writeln!(report, "ok: no violations").map_err(out)?;
        Ok(exit::OK)
    } else {
        writeln!(report, "{} violation(s)", violations.len()).map_err(out)?;
        Ok(exit::VIOLATIONS)
    }
}

pub fn sweep(spec: &Path, out: &Path, parallel: usize) -> Result<i32, CliError> {
    let text = read(spec)?;
    let scenario_err = |source| CliError::Scenario {
        path: spec.to_path_buf(),
        source,
    };
    let doc = parse_sweep(&text).map_err(scenario_err)?;
    let jobs = expand(&doc).map_err(scenario_err)?;
    info!("sweep of {} runs on {} thread(s)", jobs.len(), parallel.max(1));
    let rows = run_sweep(&jobs, parallel)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(out, buf).map_err(|e| CliError::io(out, e))?;
    let dirty = rows.iter().filter(|r| r.verdicts != "ok").count();
    if dirty > 0 {
        warn!("{dirty} of {} runs reported violations", rows.len());
        return Ok(exit::VIOLATIONS);
    }
    Ok(exit::OK)
}

pub fn generate(topology: &TopologyDoc, seed: u64) -> Result<String, CliError> {
    let g = topology.build(seed).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(to_edge_list(&g))
}
