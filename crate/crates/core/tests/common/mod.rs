#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use linkcons::adversary::generators::gen_random_connected;
use linkcons::adversary::random_schedule;
use linkcons::engine::{run_to_completion, ExecutionTrace, Scenario};
use linkcons::{AdversarySpec, AlgorithmSpec, CrashSchedule, DynamicGraph, NodeId, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct FuzzCase {
    pub graph: DynamicGraph,
    pub inputs: BTreeMap<NodeId, Value>,
    pub schedule: CrashSchedule,
}

/// Random connected graph on at most 8 nodes with at most 6 extra links,
/// random inputs and a random crash schedule.
pub fn fuzz_case(seed: u64) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
    let n: u32 = rng.gen_range(1..=8);
    let max_extra = (n * n.saturating_sub(1) / 2).saturating_sub(n.saturating_sub(1));
    let extra = rng.gen_range(0..=max_extra.min(6));
    let graph = gen_random_connected(n, extra, seed).unwrap();
    let domain = if rng.gen_bool(0.3) { 3 } else { 1000 };
    let inputs = graph.nodes().iter().map(|&v| (v, rng.gen_range(0..domain))).collect();
    let m = graph.link_count();
    let horizon = rng.gen_range(1..=(2 * n as u64 + 4));
    let schedule = random_schedule(&graph, seed.wrapping_mul(31) + 7, m, horizon);
    FuzzCase {
        graph,
        inputs,
        schedule,
    }
}

pub fn scenario(case: &FuzzCase, algorithm: AlgorithmSpec) -> Scenario {
    Scenario::new(case.graph.clone(), case.inputs.clone(), algorithm).with_adversary(AdversarySpec::CrashSchedule {
        schedule: case.schedule.clone(),
    })
}

/// Stretch of the topology with every scheduled crash applied. Failures
/// only grow, so this bounds the stretch of any execution under the
/// schedule.
pub fn scheduled_stretch(case: &FuzzCase) -> u64 {
    case.schedule.apply_all(&case.graph).unwrap().stretch() as u64
}

pub fn algorithm_for(name: &str, case: &FuzzCase) -> AlgorithmSpec {
    match name {
        "fast" => AlgorithmSpec::Fast {
            lambda: scheduled_stretch(case),
        },
        "sm" => AlgorithmSpec::Sm,
        "lm" => AlgorithmSpec::Lm,
        "es" => AlgorithmSpec::Es,
        "ol" => AlgorithmSpec::Ol,
        other => panic!("unknown algorithm {other}"),
    }
}

pub fn run(case: &FuzzCase, algorithm: AlgorithmSpec) -> ExecutionTrace {
    run_to_completion(&scenario(case, algorithm)).unwrap()
}

pub const ALGORITHMS: [&str; 5] = ["fast", "sm", "lm", "es", "ol"];

pub fn inputs_from(values: &[(u32, Value)]) -> BTreeMap<NodeId, Value> {
    values.iter().map(|&(n, v)| (NodeId(n), v)).collect()
}

/// BFS distances over an explicit adjacency map, independent of the
/// library's graph code.
pub fn bfs(adj: &BTreeMap<u32, Vec<u32>>, s: u32) -> BTreeMap<u32, usize> {
    let mut dist = BTreeMap::from([(s, 0)]);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        let du = dist[&u];
        for &v in adj.get(&u).into_iter().flatten() {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                e.insert(du + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

pub fn adjacency(nodes: &BTreeSet<u32>, edges: &BTreeSet<(u32, u32)>) -> BTreeMap<u32, Vec<u32>> {
    let mut adj: BTreeMap<u32, Vec<u32>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
    for &(a, b) in edges {
        adj.get_mut(&a).unwrap().push(b);
        adj.get_mut(&b).unwrap().push(a);
    }
    adj
}

/// Diameter of a connected graph, or `None` if it is disconnected.
pub fn oracle_diameter(nodes: &BTreeSet<u32>, edges: &BTreeSet<(u32, u32)>) -> Option<usize> {
    let adj = adjacency(nodes, edges);
    let mut best = 0;
    for &s in nodes {
        let d = bfs(&adj, s);
        if d.len() != nodes.len() {
            return None;
        }
        best = best.max(*d.values().max().unwrap());
    }
    Some(best)
}

/// Reliable edges of `g` as plain pairs.
pub fn reliable_edges(g: &DynamicGraph) -> (BTreeSet<u32>, BTreeSet<(u32, u32)>) {
    let nodes = g.nodes().iter().map(|n| n.0).collect();
    let edges = g
        .links()
        .iter()
        .filter(|l| g.is_reliable(l))
        .map(|l| (l.lo().0, l.hi().0))
        .collect();
    (nodes, edges)
}

/// Components by repeated BFS.
pub fn oracle_components(nodes: &BTreeSet<u32>, edges: &BTreeSet<(u32, u32)>) -> Vec<BTreeSet<u32>> {
    let adj = adjacency(nodes, edges);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in nodes {
        if seen.contains(&s) {
            continue;
        }
        let comp: BTreeSet<u32> = bfs(&adj, s).into_keys().collect();
        seen.extend(comp.iter().copied());
        out.push(comp);
    }
    out
}

/// Largest diameter reachable by adding exactly `k-1` links that make the
/// graph connected, where `k` is the number of components. Any such link set
/// is a spanning tree over the components, so the search enumerates
/// component trees (Prüfer sequences) and every choice of endpoints.
pub fn max_diameter_by_edge_addition(nodes: &BTreeSet<u32>, edges: &BTreeSet<(u32, u32)>) -> usize {
    let comps = oracle_components(nodes, edges);
    let k = comps.len();
    if k == 1 {
        return oracle_diameter(nodes, edges).unwrap();
    }
    let members: Vec<Vec<u32>> = comps.iter().map(|c| c.iter().copied().collect()).collect();
    let mut best = 0;
    for tree in component_trees(k) {
        let mut choice = vec![0usize; tree.len()];
        loop {
            let mut e = edges.clone();
            for (t, &(a, b)) in tree.iter().enumerate() {
                let na = members[a].len();
                let (ia, ib) = (choice[t] % na, choice[t] / na);
                let (u, v) = (members[a][ia], members[b][ib]);
                e.insert((u.min(v), u.max(v)));
            }
            best = best.max(oracle_diameter(nodes, &e).expect("tree over components connects"));
            // advance mixed-radix counter
            let mut t = 0;
            loop {
                if t == tree.len() {
                    break;
                }
                let (a, b) = tree[t];
                choice[t] += 1;
                if choice[t] < members[a].len() * members[b].len() {
                    break;
                }
                choice[t] = 0;
                t += 1;
            }
            if t == tree.len() {
                break;
            }
        }
    }
    best
}

/// All labelled trees on `k` vertices as edge lists.
fn component_trees(k: usize) -> Vec<Vec<(usize, usize)>> {
    if k == 2 {
        return vec![vec![(0, 1)]];
    }
    let mut out = Vec::new();
    let total = k.pow((k - 2) as u32);
    for code in 0..total {
        let mut seq = Vec::with_capacity(k - 2);
        let mut c = code;
        for _ in 0..k - 2 {
            seq.push(c % k);
            c /= k;
        }
        let mut degree = vec![1usize; k];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut tree = Vec::new();
        for &s in &seq {
            let leaf = (0..k).find(|&v| degree[v] == 1).unwrap();
            tree.push((leaf, s));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
        tree.push((rest[0], rest[1]));
        out.push(tree);
    }
    out
}

/// Literal search over all `(k-1)`-subsets of non-edges; only for tiny graphs.
pub fn max_diameter_brute_force(nodes: &BTreeSet<u32>, edges: &BTreeSet<(u32, u32)>) -> usize {
    let k = oracle_components(nodes, edges).len();
    let v: Vec<u32> = nodes.iter().copied().collect();
    let non_edges: Vec<(u32, u32)> = v
        .iter()
        .flat_map(|&a| v.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
        .filter(|e| !edges.contains(e))
        .collect();
    let mut best = None;
    subsets(&non_edges, k - 1, 0, &mut Vec::new(), &mut |chosen| {
        let mut e = edges.clone();
        e.extend(chosen.iter().copied());
        if let Some(d) = oracle_diameter(nodes, &e) {
            best = Some(best.map_or(d, |b: usize| b.max(d)));
        }
    });
    best.expect("some completion connects")
}

fn subsets<T: Copy>(items: &[T], k: usize, from: usize, cur: &mut Vec<T>, f: &mut impl FnMut(&[T])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in from..items.len() {
        cur.push(items[i]);
        subsets(items, k, i + 1, cur, f);
        cur.pop();
    }
}
