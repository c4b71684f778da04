//! Topology generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netgraph::{DynamicGraph, GraphError, Link, NodeId};

fn build(n: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<DynamicGraph, GraphError> {
    let links = edges
        .into_iter()
        .map(|(u, v)| Link::new(NodeId(u), NodeId(v)))
        .collect::<Result<Vec<_>, _>>()?;
    DynamicGraph::new((0..n).map(NodeId), links)
}

fn invalid(msg: impl Into<String>) -> GraphError {
    GraphError::InvalidArgument(msg.into())
}

pub fn gen_clique(n: u32) -> Result<DynamicGraph, GraphError> {
    if n == 0 {
        return Err(invalid("clique needs at least one node"));
    }
    build(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

pub fn gen_path(n: u32) -> Result<DynamicGraph, GraphError> {
    if n == 0 {
        return Err(invalid("path needs at least one node"));
    }
    build(n, (1..n).map(|i| (i - 1, i)))
}

pub fn gen_cycle(n: u32) -> Result<DynamicGraph, GraphError> {
    if n < 3 {
        return Err(invalid("cycle needs at least three nodes"));
    }
    build(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Center 0 with leaves `1..=leaves`.
pub fn gen_star(leaves: u32) -> Result<DynamicGraph, GraphError> {
    build(leaves + 1, (1..=leaves).map(|i| (0, i)))
}

/// Cycle `0..2D` with vertex 1 replaced by `x` copies adjacent to 0 and 2.
/// The copies are named 1 and `2D..2D+x-1`. For `D = 1` only `x = 1` is
/// accepted, giving a single link.
pub fn gen_cycle_multi(x: u32, d: u32) -> Result<DynamicGraph, GraphError> {
    if x == 0 || d == 0 {
        return Err(invalid("x and D must be positive"));
    }
    if d == 1 {
        if x != 1 {
            return Err(invalid("D = 1 admits only x = 1"));
        }
        return build(2, [(0, 1)]);
    }
    let len = 2 * d;
    let mut edges: Vec<(u32, u32)> = (2..len).map(|i| (i, (i + 1) % len)).collect();
    let copies = std::iter::once(1).chain(len..len + x - 1);
    for c in copies {
        edges.push((0, c));
        edges.push((c, 2));
    }
    build(len + x - 1, edges)
}

/// Degree of each part: `⌈m/n⌉` rounded up to even.
pub fn regular_parts_degree(n: u32, m: u32) -> u32 {
    let d = m.div_ceil(n.max(1));
    d + d % 2
}

/// Two circulant `d`-regular parts of `⌈n/2⌉` nodes each, with node `i` of
/// the first part matched to node `i + ⌈n/2⌉` of the second.
pub fn gen_regular_parts(n: u32, m: u32) -> Result<DynamicGraph, GraphError> {
    if n == 0 || m < n || u64::from(m) > u64::from(n) * u64::from(n) {
        return Err(invalid("need n <= m <= n^2"));
    }
    let d = regular_parts_degree(n, m);
    let half = n.div_ceil(2);
    if d >= half {
        return Err(invalid(format!("part degree {d} must be below part size {half}")));
    }
    let mut edges = Vec::new();
    for base in [0, half] {
        for i in 0..half {
            for off in 1..=d / 2 {
                edges.push((base + i, base + (i + off) % half));
            }
        }
    }
    edges.extend((0..half).map(|i| (i, i + half)));
    build(2 * half, edges)
}

/// Two copies of a part with `half_n` nodes and diameter `half_diameter`,
/// joined by every possible cross link. A part is the path
/// `0..=half_diameter` plus a clique of the remaining nodes, each adjacent to
/// path nodes 0 and 1.
pub fn gen_join(half_n: u32, half_diameter: u32) -> Result<DynamicGraph, GraphError> {
    if half_n == 0 {
        return Err(invalid("parts need at least one node"));
    }
    if half_n < half_diameter + 1 {
        return Err(invalid(format!(
            "a part of {half_n} nodes cannot have diameter {half_diameter}"
        )));
    }
    if half_diameter == 0 && half_n != 1 {
        return Err(invalid("diameter 0 requires a single-node part"));
    }
    let mut edges = Vec::new();
    for base in [0, half_n] {
        for i in 1..=half_diameter {
            edges.push((base + i - 1, base + i));
        }
        let extra: Vec<u32> = (half_diameter + 1..half_n).collect();
        for (k, &a) in extra.iter().enumerate() {
            edges.push((base, base + a));
            edges.push((base + 1, base + a));
            for &b in &extra[k + 1..] {
                edges.push((base + a, base + b));
            }
        }
    }
    for a in 0..half_n {
        for b in half_n..2 * half_n {
            edges.push((a, b));
        }
    }
    build(2 * half_n, edges)
}

/// Uniform random labelled spanning tree (via a Prüfer sequence) plus
/// `extra_edges` distinct random non-tree links.
pub fn gen_random_connected(n: u32, extra_edges: u32, seed: u64) -> Result<DynamicGraph, GraphError> {
    if n == 0 {
        return Err(invalid("need at least one node"));
    }
    let max_extra = u64::from(n) * u64::from(n - 1) / 2 - u64::from(n - 1);
    if u64::from(extra_edges) > max_extra {
        return Err(invalid(format!("at most {max_extra} extra edges fit on {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let norm = |a: u32, b: u32| (a.min(b), a.max(b));
    if n == 2 {
        edges.insert((0, 1));
    } else if n > 2 {
        let seq: Vec<u32> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        let mut degree = vec![1u32; n as usize];
        for &s in &seq {
            degree[s as usize] += 1;
        }
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v as usize] == 1).expect("a leaf always exists");
            edges.insert(norm(leaf, s));
            degree[leaf as usize] -= 1;
            degree[s as usize] -= 1;
        }
        let rest: Vec<u32> = (0..n).filter(|&v| degree[v as usize] == 1).collect();
        edges.insert(norm(rest[0], rest[1]));
    }
    let mut non_edges: Vec<(u32, u32)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|e| !edges.contains(e))
        .collect();
    non_edges.shuffle(&mut rng);
    edges.extend(non_edges.into_iter().take(extra_edges as usize));
    build(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_multi_shape() {
        let g = gen_cycle_multi(1, 2).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.link_count(), 4);
        assert_eq!(g.whole_diameter(), Some(2));
        for (x, d) in [(1, 3), (3, 2), (4, 5), (2, 6)] {
            let g = gen_cycle_multi(x, d).unwrap();
            assert_eq!(g.node_count() as u32, 2 * d + x - 1);
            assert_eq!(g.whole_diameter(), Some(d as usize));
        }
        assert_eq!(gen_cycle_multi(1, 1).unwrap().whole_diameter(), Some(1));
        assert!(gen_cycle_multi(2, 1).is_err());
    }

    #[test]
    fn regular_parts_shape() {
        let g = gen_regular_parts(12, 36).unwrap();
        assert_eq!(g.node_count(), 12);
        assert_eq!(g.link_count(), 30);
        assert!(g.nodes().iter().all(|&v| g.degree(v) == 5));
        assert!(gen_regular_parts(4, 16).is_err());
        assert!(gen_regular_parts(12, 11).is_err());
    }

    #[test]
    fn join_shape() {
        let g = gen_join(5, 3).unwrap();
        assert_eq!(g.node_count(), 10);
        let cross = g.links().iter().filter(|l| (l.lo().0 < 5) != (l.hi().0 < 5)).count();
        assert_eq!(cross, 25);
        assert!(gen_join(3, 3).is_err());
        assert_eq!(gen_join(1, 0).unwrap().link_count(), 1);
    }

    #[test]
    fn random_connected_tree() {
        for seed in 0..20 {
            let g = gen_random_connected(7, 0, seed).unwrap();
            assert_eq!(g.link_count(), 6);
            assert!(g.is_connected());
        }
        let a = gen_random_connected(8, 5, 3).unwrap();
        assert_eq!(a, gen_random_connected(8, 5, 3).unwrap());
        assert_eq!(a.link_count(), 12);
        assert_eq!(gen_random_connected(1, 0, 0).unwrap().node_count(), 1);
        assert_eq!(gen_random_connected(3, 1, 0).unwrap().link_count(), 3);
        assert!(gen_random_connected(3, 2, 0).is_err());
    }
}
