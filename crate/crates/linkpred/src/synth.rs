//! Deterministic synthetic graph generators for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Preferential attachment graph: start from a complete graph on `m + 1`
/// vertices, then attach each new vertex to `m` distinct existing vertices
/// sampled proportionally to degree (by drawing uniformly from the list of
/// edge endpoints). Identical `(n, m, seed)` always yields the same graph.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> Graph {
    assert!(m >= 1, "attachment count m must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = (m + 1).min(n);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for u in 0..core {
        for v in (u + 1)..core {
            edges.push((u as u32, v as u32));
        }
    }
    // Every edge contributes both endpoints, so uniform draws from this list
    // land on a vertex with probability proportional to its degree.
    let mut endpoints: Vec<u32> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for v in core..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v as u32));
            endpoints.push(t);
            endpoints.push(v as u32);
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are in range")
}

/// Connected random graph: a random recursive tree (each vertex v >= 1 picks
/// a uniform parent among 0..v) plus `extra_edges` additional distinct
/// uniform non-tree pairs.
pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Graph {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(n - 1 + extra_edges);
    for v in 1..n {
        edges.push((rng.gen_range(0..v) as u32, v as u32));
    }
    let max_edges = n * (n - 1) / 2;
    let mut seen: std::collections::HashSet<(u32, u32)> = edges.iter().copied().collect();
    while seen.len() < (n - 1 + extra_edges).min(max_edges) {
        let u = rng.gen_range(0..n) as u32;
        let v = rng.gen_range(0..n) as u32;
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if seen.insert(pair) {
            edges.push(pair);
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are in range")
}

/// Erdos-Renyi style graph: each of the `n(n-1)/2` pairs is an edge
/// independently with probability `p`. May be disconnected.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are in range")
}
