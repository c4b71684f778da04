//! Scenario documents (TOML).
//!
//! A document names a topology, inputs, an algorithm and an adversary. Every
//! table rejects unknown keys so typos in experiment configs surface early.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use linkcons::adversary::generators::{
    gen_clique, gen_cycle, gen_cycle_multi, gen_join, gen_path, gen_random_connected, gen_regular_parts, gen_star,
};
use linkcons::adversary::random_schedule;
use linkcons::engine::{default_round_limit, Scenario};
use linkcons::{AdversarySpec, AlgorithmSpec, CrashSchedule, DynamicGraph, Link, NodeId, Round, Value};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// A diagnostic naming the offending field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioError {
    pub field: String,
    pub msg: String,
}

impl ScenarioError {
    fn new(field: impl Into<String>, msg: impl Into<String>) -> Self {
        ScenarioError {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "{}: {}", self.field, self.msg)
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDoc {
    pub generator: Option<String>,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub leaves: Option<u32>,
    pub x: Option<u32>,
    pub d: Option<u32>,
    pub extra: Option<u32>,
    pub seed: Option<u64>,
    /// Explicit link list; excludes `generator`.
    pub edges: Option<Vec<(u32, u32)>>,
}

fn need(v: Option<u32>, field: &str, generator: &str) -> Result<u32, ScenarioError> {
    v.ok_or_else(|| {
        ScenarioError::new(
            format!("topology.{field}"),
            format!("required by generator `{generator}`"),
        )
    })
}

impl TopologyDoc {
    /// Short label used in sweep rows.
    pub fn label(&self) -> String {
        match (&self.generator, &self.edges) {
            (Some(g), _) => {
                let params: Vec<String> = [
                    ("n", self.n),
                    ("m", self.m),
                    ("leaves", self.leaves),
                    ("x", self.x),
                    ("d", self.d),
                    ("extra", self.extra),
                ]
                .iter()
                .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
                .collect();
                if params.is_empty() {
                    g.clone()
                } else {
                    format!("{g}({})", params.join(","))
                }
            }
            (None, Some(e)) => format!("edges({})", e.len()),
            (None, None) => "none".into(),
        }
    }

    pub fn build(&self, default_seed: u64) -> Result<DynamicGraph, ScenarioError> {
        let graph_err = |e: linkcons::GraphError| ScenarioError::new("topology", e.to_string());
        match (&self.generator, &self.edges) {
            (Some(_), Some(_)) => Err(ScenarioError::new(
                "topology.edges",
                "give either `generator` or `edges`, not both",
            )),
            (None, None) => Err(ScenarioError::new("topology", "needs `generator` or `edges`")),
            (None, Some(edges)) => DynamicGraph::from_edges(edges.iter().copied()).map_err(graph_err),
            (Some(g), None) => {
                let g = g.as_str();
                let built = match g {
                    "clique" => gen_clique(need(self.n, "n", g)?),
                    "path" => gen_path(need(self.n, "n", g)?),
                    "cycle" => gen_cycle(need(self.n, "n", g)?),
                    "star" => gen_star(need(self.leaves, "leaves", g)?),
                    "cycle-multi" => gen_cycle_multi(need(self.x, "x", g)?, need(self.d, "d", g)?),
                    "regular-parts" => gen_regular_parts(need(self.n, "n", g)?, need(self.m, "m", g)?),
                    "join" => gen_join(need(self.n, "n", g)?, need(self.d, "d", g)?),
                    "random-connected" => gen_random_connected(
                        need(self.n, "n", g)?,
                        self.extra.unwrap_or(0),
                        self.seed.unwrap_or(default_seed),
                    ),
                    other => {
                        return Err(ScenarioError::new(
                            "topology.generator",
                            format!("unknown generator `{other}`"),
                        ))
                    }
                };
                built.map_err(graph_err)
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsDoc {
    /// `explicit` (default when `values` is present) or `distinct-random`.
    pub mode: Option<String>,
    pub seed: Option<u64>,
    /// Node name (as a string key) to input value.
    pub values: Option<BTreeMap<String, Value>>,
}

impl InputsDoc {
    pub fn resolve(&self, graph: &DynamicGraph, default_seed: u64) -> Result<BTreeMap<NodeId, Value>, ScenarioError> {
        let mode = match (&self.mode, &self.values) {
            (Some(m), _) => m.as_str(),
            (None, Some(_)) => "explicit",
            (None, None) => "distinct-random",
        };
        match mode {
            "explicit" => {
                let values = self
                    .values
                    .as_ref()
                    .ok_or_else(|| ScenarioError::new("inputs.values", "required for explicit inputs"))?;
                let mut out = BTreeMap::new();
                for (k, &v) in values {
                    let id = k
                        .parse::<u32>()
                        .map(NodeId)
                        .map_err(|_| ScenarioError::new("inputs.values", format!("`{k}` is not a node name")))?;
                    if !graph.contains_node(id) {
                        return Err(ScenarioError::new("inputs.values", format!("unknown node {id}")));
                    }
                    out.insert(id, v);
                }
                let missing: Vec<String> = graph
                    .nodes()
                    .iter()
                    .filter(|n| !out.contains_key(n))
                    .map(|n| n.to_string())
                    .collect();
                if !missing.is_empty() {
                    return Err(ScenarioError::new(
                        "inputs.values",
                        format!("no input for node(s) {}", missing.join(", ")),
                    ));
                }
                Ok(out)
            }
            "distinct-random" => {
                if self.values.is_some() {
                    return Err(ScenarioError::new(
                        "inputs.values",
                        "not allowed with distinct-random inputs",
                    ));
                }
                Ok(distinct_random(graph, self.seed.unwrap_or(default_seed)))
            }
            other => Err(ScenarioError::new(
                "inputs.mode",
                format!("unknown input mode `{other}`"),
            )),
        }
    }
}

/// Pairwise distinct inputs drawn from `0..4n`.
pub fn distinct_random(graph: &DynamicGraph, seed: u64) -> BTreeMap<NodeId, Value> {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, 4 * n.max(1), n);
    graph
        .nodes()
        .iter()
        .copied()
        .zip(picks.iter().map(|v| v as Value))
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmDoc {
    pub name: String,
    #[serde(alias = "Λ")]
    pub lambda: Option<Round>,
}

impl AlgorithmDoc {
    pub fn resolve(&self) -> Result<AlgorithmSpec, ScenarioError> {
        let forbid_lambda = |spec: AlgorithmSpec| {
            if self.lambda.is_some() {
                Err(ScenarioError::new(
                    "algorithm.lambda",
                    format!("`{}` takes no parameter Λ", self.name),
                ))
            } else {
                Ok(spec)
            }
        };
        match self.name.as_str() {
            "fast" => match self.lambda {
                Some(lambda) => Ok(AlgorithmSpec::Fast { lambda }),
                None => Err(ScenarioError::new("algorithm.lambda", "missing parameter Λ")),
            },
            "sm" => forbid_lambda(AlgorithmSpec::Sm),
            "lm" => forbid_lambda(AlgorithmSpec::Lm),
            "es" => forbid_lambda(AlgorithmSpec::Es),
            "ol" => forbid_lambda(AlgorithmSpec::Ol),
            other => Err(ScenarioError::new(
                "algorithm.name",
                format!("unknown algorithm `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrashDoc {
    pub round: Round,
    pub link: (u32, u32),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryDoc {
    /// `none`, `crash-schedule`, `random-crash`, `bipartite-cut` or `lazy-parts`.
    pub strategy: String,
    pub crashes: Option<Vec<CrashDoc>>,
    pub max_crashes: Option<usize>,
    pub horizon: Option<Round>,
    pub seed: Option<u64>,
    pub part: Option<BTreeSet<u32>>,
}

impl AdversaryDoc {
    pub fn label(&self) -> String {
        self.strategy.clone()
    }

    pub fn resolve(&self, graph: &DynamicGraph, default_seed: u64) -> Result<AdversarySpec, ScenarioError> {
        let s = self.strategy.as_str();
        let reject = |field: &str, present: bool| {
            if present {
                Err(ScenarioError::new(
                    format!("adversary.{field}"),
                    format!("not used by strategy `{s}`"),
                ))
            } else {
                Ok(())
            }
        };
        if s != "crash-schedule" {
            reject("crashes", self.crashes.is_some())?;
        }
        if s != "random-crash" {
            reject("max_crashes", self.max_crashes.is_some())?;
            reject("horizon", self.horizon.is_some())?;
            reject("seed", self.seed.is_some())?;
        }
        if s != "bipartite-cut" {
            reject("part", self.part.is_some())?;
        }
        let spec = match s {
            "none" => AdversarySpec::None,
            "lazy-parts" => AdversarySpec::LazyParts,
            "bipartite-cut" => AdversarySpec::BipartiteCut {
                part: self.part.as_ref().map(|p| p.iter().map(|&v| NodeId(v)).collect()),
            },
            "crash-schedule" => {
                let mut schedule = CrashSchedule::new();
                for c in self.crashes.iter().flatten() {
                    let link = Link::new(NodeId(c.link.0), NodeId(c.link.1))
                        .map_err(|e| ScenarioError::new("adversary.crashes", e.to_string()))?;
                    schedule.add(c.round, link);
                }
                AdversarySpec::CrashSchedule { schedule }
            }
            "random-crash" => {
                let schedule = random_schedule(
                    graph,
                    self.seed.unwrap_or(default_seed),
                    self.max_crashes.unwrap_or(graph.link_count()),
                    self.horizon.unwrap_or(2 * graph.node_count() as Round + 4),
                );
                AdversarySpec::CrashSchedule { schedule }
            }
            other => {
                return Err(ScenarioError::new(
                    "adversary.strategy",
                    format!("unknown strategy `{other}`"),
                ))
            }
        };
        if let AdversarySpec::CrashSchedule { schedule } = &spec {
            schedule
                .validate(graph)
                .map_err(|e| ScenarioError::new("adversary.crashes", e.to_string()))?;
        }
        // build once so strategy preconditions surface as diagnostics here
        spec.build(graph)
            .map_err(|e| ScenarioError::new("adversary", e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub topology: TopologyDoc,
    #[serde(default)]
    pub inputs: InputsDoc,
    pub algorithm: AlgorithmDoc,
    pub adversary: Option<AdversaryDoc>,
    pub round_limit: Option<Round>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioDoc {
    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        let graph = self.topology.build(self.seed)?;
        let inputs = self.inputs.resolve(&graph, self.seed)?;
        let algorithm = self.algorithm.resolve()?;
        let adversary = match &self.adversary {
            Some(a) => a.resolve(&graph, self.seed)?,
            None => AdversarySpec::None,
        };
        if self.round_limit == Some(0) {
            return Err(ScenarioError::new("round_limit", "must be positive"));
        }
        let round_limit = self.round_limit.unwrap_or_else(|| default_round_limit(&graph));
        Ok(Scenario::new(graph, inputs, algorithm)
            .with_adversary(adversary)
            .with_round_limit(round_limit)
            .with_seed(self.seed))
    }
}

pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::new("", e.to_string().trim_end().to_string()))
}

/// Parses and validates a scenario document. `seed` overrides the
/// document's seed before anything random is resolved.
pub fn parse_scenario(text: &str, seed: Option<u64>) -> Result<Scenario, ScenarioError> {
    let mut doc: ScenarioDoc = parse_toml(text)?;
    if let Some(s) = seed {
        doc.seed = s;
    }
    doc.resolve()
}
