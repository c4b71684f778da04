//! Ground-truth network graph.
//!
//! A [`DynamicGraph`] holds the initial topology together with the set of
//! links that have failed at least once. Every structural query (components,
//! diameters, stretch) looks only at the reliable links, i.e.
//! `links \ unreliable`, and is recomputed from scratch with BFS.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unique node name. Names are totally ordered and need not be contiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

// Accepts numeric strings too: JSON map keys are strings, and maps nested in
// tagged enums are buffered before their key type is known.
impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = NodeId;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a node name (u32)")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<NodeId, E> {
                u32::try_from(v).map(NodeId).map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<NodeId, E> {
                u32::try_from(v).map(NodeId).map_err(E::custom)
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<NodeId, E> {
                v.parse().map(NodeId).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 0-based port index local to one node.
pub type Port = usize;

/// Undirected link between two distinct nodes, stored with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[NodeId; 2]", into = "[NodeId; 2]")]
pub struct Link {
    lo: NodeId,
    hi: NodeId,
}

impl Link {
    pub fn new(u: NodeId, v: NodeId) -> Result<Self, GraphError> {
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Ok(Link { lo: u, hi: v }),
            std::cmp::Ordering::Greater => Ok(Link { lo: v, hi: u }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(u)),
        }
    }

    pub fn lo(&self) -> NodeId {
        self.lo
    }

    pub fn hi(&self) -> NodeId {
        self.hi
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.lo == n || self.hi == n
    }

    /// The endpoint opposite to `n`, if `n` is an endpoint.
    pub fn other(&self, n: NodeId) -> Option<NodeId> {
        if n == self.lo {
            Some(self.hi)
        } else if n == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }
}

impl TryFrom<[NodeId; 2]> for Link {
    type Error = GraphError;

    fn try_from(value: [NodeId; 2]) -> Result<Self, Self::Error> {
        Link::new(value[0], value[1])
    }
}

impl From<Link> for [NodeId; 2] {
    fn from(l: Link) -> Self {
        [l.lo, l.hi]
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate link {0}")]
    DuplicateLink(Link),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(Link),
    #[error("node set is not a connected component")]
    NotConnected,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("edge list line {line}: {msg}")]
    EdgeList { line: usize, msg: String },
}

/// Network graph with per-link reliability and per-node port maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicGraph {
    nodes: BTreeSet<NodeId>,
    links: BTreeSet<Link>,
    unreliable: BTreeSet<Link>,
    ports: BTreeMap<NodeId, Vec<Link>>,
}

impl DynamicGraph {
    /// Builds a graph from an explicit node set and link list. Ports of each
    /// node are numbered by ascending neighbor name.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        links: impl IntoIterator<Item = Link>,
    ) -> Result<Self, GraphError> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let mut set = BTreeSet::new();
        for l in links {
            for end in [l.lo, l.hi] {
                if !nodes.contains(&end) {
                    return Err(GraphError::UnknownNode(end));
                }
            }
            if !set.insert(l) {
                return Err(GraphError::DuplicateLink(l));
            }
        }
        let mut ports: BTreeMap<NodeId, Vec<Link>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
        // BTreeSet iteration is sorted by (lo, hi), so pushing in order keeps
        // each node's port list sorted by neighbor name.
        for l in &set {
            ports.get_mut(&l.lo).expect("endpoint checked").push(*l);
            ports.get_mut(&l.hi).expect("endpoint checked").push(*l);
        }
        for (n, list) in ports.iter_mut() {
            list.sort_by_key(|l| l.other(*n));
        }
        Ok(DynamicGraph {
            nodes,
            links: set,
            unreliable: BTreeSet::new(),
            ports,
        })
    }

    /// Builds a graph whose node set is exactly the set of edge endpoints.
    pub fn from_edges(edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, GraphError> {
        let mut nodes = BTreeSet::new();
        let mut links = Vec::new();
        for (u, v) in edges {
            nodes.insert(NodeId(u));
            nodes.insert(NodeId(v));
            links.push(Link::new(NodeId(u), NodeId(v))?);
        }
        DynamicGraph::new(nodes, links)
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    pub fn unreliable(&self) -> &BTreeSet<Link> {
        &self.unreliable
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    pub fn is_reliable(&self, l: &Link) -> bool {
        self.links.contains(l) && !self.unreliable.contains(l)
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.ports.get(&n).map_or(0, Vec::len)
    }

    /// Incident links of `n` in port order.
    pub fn ports(&self, n: NodeId) -> &[Link] {
        self.ports.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn link_at(&self, n: NodeId, port: Port) -> Option<Link> {
        self.ports.get(&n)?.get(port).copied()
    }

    pub fn port_of(&self, n: NodeId, link: &Link) -> Option<Port> {
        self.ports.get(&n)?.iter().position(|l| l == link)
    }

    /// Neighbor names of `n` in port order.
    pub fn neighbors(&self, n: NodeId) -> Vec<NodeId> {
        self.ports(n).iter().filter_map(|l| l.other(n)).collect()
    }

    /// Exchanges the links behind two ports of `n`. Used only by adversaries
    /// that decide port bindings lazily, before either port carried traffic.
    pub fn swap_ports(&mut self, n: NodeId, a: Port, b: Port) -> Result<(), GraphError> {
        let list = self.ports.get_mut(&n).ok_or(GraphError::UnknownNode(n))?;
        if a >= list.len() || b >= list.len() {
            return Err(GraphError::InvalidArgument(format!("port out of range on node {n}")));
        }
        list.swap(a, b);
        Ok(())
    }

    /// Marks `l` unreliable. Returns `true` if this is its first failure.
    pub fn fail_link(&mut self, l: Link) -> Result<bool, GraphError> {
        if !self.links.contains(&l) {
            return Err(GraphError::UnknownLink(l));
        }
        Ok(self.unreliable.insert(l))
    }

    /// Nodes indexed densely, with reliable adjacency lists.
    fn reliable_adjacency(&self) -> (Vec<NodeId>, BTreeMap<NodeId, usize>, Vec<Vec<usize>>) {
        let order: Vec<NodeId> = self.nodes.iter().copied().collect();
        let index: BTreeMap<NodeId, usize> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); order.len()];
        for l in self.links.difference(&self.unreliable) {
            let (a, b) = (index[&l.lo], index[&l.hi]);
            adj[a].push(b);
            adj[b].push(a);
        }
        (order, index, adj)
    }

    /// Partition of the nodes into reliable connected components, ordered by
    /// smallest member.
    pub fn connected_components(&self) -> Vec<BTreeSet<NodeId>> {
        let (order, _, adj) = self.reliable_adjacency();
        let mut seen = vec![false; order.len()];
        let mut out = Vec::new();
        for start in 0..order.len() {
            if seen[start] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(u) = queue.pop_front() {
                comp.insert(order[u]);
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Reliable hop distances from `src` to every node it can reach.
    pub fn distances_from(&self, src: NodeId) -> Result<BTreeMap<NodeId, usize>, GraphError> {
        let (order, index, adj) = self.reliable_adjacency();
        let s = *index.get(&src).ok_or(GraphError::UnknownNode(src))?;
        Ok(bfs(&adj, s)
            .into_iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|d| (order[i], d)))
            .collect())
    }

    /// Diameter of one reliable component.
    pub fn diameter(&self, component: &BTreeSet<NodeId>) -> Result<usize, GraphError> {
        if let Some(n) = component.iter().find(|n| !self.nodes.contains(n)) {
            return Err(GraphError::UnknownNode(*n));
        }
        let (_, index, adj) = self.reliable_adjacency();
        let members: Vec<usize> = component.iter().map(|n| index[n]).collect();
        let mut best = 0;
        for &s in &members {
            let dist = bfs(&adj, s);
            let reached = dist.iter().filter(|d| d.is_some()).count();
            if reached != members.len() {
                return Err(GraphError::NotConnected);
            }
            for &t in &members {
                match dist[t] {
                    Some(d) => best = best.max(d),
                    None => return Err(GraphError::NotConnected),
                }
            }
        }
        Ok(best)
    }

    /// Stretch: `(k - 1) + sum of component diameters` over reliable links.
    pub fn stretch(&self) -> usize {
        let (_, _, adj) = self.reliable_adjacency();
        let n = adj.len();
        if n == 0 {
            return 0;
        }
        let mut comp_of = vec![usize::MAX; n];
        let mut diam: Vec<usize> = Vec::new();
        for s in 0..n {
            let dist = bfs(&adj, s);
            let ecc = dist.iter().flatten().copied().max().unwrap_or(0);
            if comp_of[s] == usize::MAX {
                let c = diam.len();
                diam.push(0);
                for (t, d) in dist.iter().enumerate() {
                    if d.is_some() {
                        comp_of[t] = c;
                    }
                }
            }
            let c = comp_of[s];
            diam[c] = diam[c].max(ecc);
        }
        diam.len() - 1 + diam.iter().sum::<usize>()
    }

    /// Whether `u` and `v` are joined by a path of reliable links.
    pub fn reliable_path_exists(&self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        if !self.nodes.contains(&v) {
            return Err(GraphError::UnknownNode(v));
        }
        Ok(self.distances_from(u)?.contains_key(&v))
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Diameter of the whole (reliable) graph, or `None` if disconnected.
    pub fn whole_diameter(&self) -> Option<usize> {
        let comps = self.connected_components();
        match comps.as_slice() {
            [] => Some(0),
            [only] => self.diameter(only).ok(),
            _ => None,
        }
    }

    /// Copy of this graph with its failure record cleared.
    pub fn pristine(&self) -> DynamicGraph {
        let mut g = self.clone();
        g.unreliable.clear();
        g
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have a distance");
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Parses the edge-list text format: one `u v` pair per line, decimal node
/// names, `#` starts a comment. A line holding a single name declares an
/// isolated node.
pub fn parse_edge_list(text: &str) -> Result<DynamicGraph, GraphError> {
    let mut nodes = BTreeSet::new();
    let mut links = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| GraphError::EdgeList { line: i + 1, msg };
        let ids = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>()
                    .map(NodeId)
                    .map_err(|e| err(format!("bad node id `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match ids.as_slice() {
            [u] => {
                nodes.insert(*u);
            }
            [u, v] => {
                nodes.insert(*u);
                nodes.insert(*v);
                links.push(Link::new(*u, *v).map_err(|e| err(e.to_string()))?);
            }
            _ => return Err(err(format!("expected `u v`, got {} fields", ids.len()))),
        }
    }
    DynamicGraph::new(nodes, links)
}

/// Renders a graph in the edge-list text format. Isolated nodes are written
/// as single-name lines.
pub fn to_edge_list(g: &DynamicGraph) -> String {
    let mut out = format!("# {} nodes, {} links\n", g.node_count(), g.link_count());
    for n in g.nodes() {
        if g.degree(*n) == 0 {
            out.push_str(&format!("{n}\n"));
        }
    }
    for l in g.links() {
        out.push_str(&format!("{} {}\n", l.lo, l.hi));
    }
    out
}
