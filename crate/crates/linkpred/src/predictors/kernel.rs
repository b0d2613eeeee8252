//! Dense graph kernels: Katz, rooted PageRank, effective resistance, and
//! shortest path distance.
//!
//! Each kernel materializes an n-by-n score matrix, so they are guarded by
//! a vertex limit (`PredictorParams::dense_guard`). Kernels where smaller
//! is better (resistance, shortest path) store negated values; every
//! predictor then ranks by descending score. Scoring always reads
//! `(K[x,y] + K[y,x]) / 2`, which leaves symmetric kernels untouched and
//! symmetrizes rooted PageRank.

use nalgebra::DMatrix;

use super::{validate_k, LinkPredictor, PredictorParams, ScoredPair, TopScores};
use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

/// Dense pairwise scores under a fixed kernel.
pub struct GraphKernel {
    name: &'static str,
    matrix: DMatrix<f64>,
}

impl std::fmt::Debug for GraphKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphKernel")
            .field("name", &self.name)
            .field("order", &self.order())
            .finish()
    }
}

impl GraphKernel {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Score of an unordered pair: the symmetrized matrix entry.
    pub fn pair_score(&self, x: VertexId, y: VertexId) -> f64 {
        let (x, y) = (x as usize, y as usize);
        0.5 * (self.matrix[(x, y)] + self.matrix[(y, x)])
    }
}

fn guard(graph: &Graph, limit: usize) -> Result<()> {
    if graph.vertex_count() > limit {
        return Err(Error::SizeGuard {
            vertices: graph.vertex_count(),
            limit,
        });
    }
    Ok(())
}

/// Estimates the adjacency spectral radius by power iteration on `A + I`.
/// The shift keeps the iteration convergent on bipartite graphs, where `A`
/// itself has a matching negative eigenvalue.
pub fn spectral_radius_estimate(graph: &Graph) -> f64 {
    let n = graph.vertex_count();
    if n == 0 || graph.edge_count() == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..1000 {
        for (x, wv) in w.iter_mut().enumerate() {
            let mut acc = v[x];
            for &u in graph.neighbors(x as VertexId) {
                acc += v[u as usize];
            }
            *wv = acc;
        }
        let next: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - 1.0;
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (vv, wv) in v.iter_mut().zip(&w) {
            *vv = wv / norm;
        }
        if (next - rayleigh).abs() <= 1e-13 * next.abs().max(1.0) {
            return next;
        }
        rayleigh = next;
    }
    rayleigh
}

/// Katz kernel `K = (I - beta A)^-1 - I`, the sum over all path counts
/// weighted by `beta^length`. Requires `beta * spectral_radius < 1` for the
/// series to converge.
pub fn katz_kernel(graph: &Graph, beta: f64, guard_limit: usize) -> Result<GraphKernel> {
    guard(graph, guard_limit)?;
    if !(beta > 0.0) {
        return Err(Error::config(format!("katz beta must be positive, got {beta}")));
    }
    let rho = spectral_radius_estimate(graph);
    if beta * rho >= 1.0 {
        return Err(Error::DivergentSeries {
            beta,
            spectral_radius: rho,
        });
    }
    let n = graph.vertex_count();
    let mut m = DMatrix::identity(n, n);
    for (u, v) in graph.edges() {
        m[(u as usize, v as usize)] = -beta;
        m[(v as usize, u as usize)] = -beta;
    }
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::DivergentSeries {
            beta,
            spectral_radius: rho,
        })?;
    let k = inv - DMatrix::identity(n, n);
    Ok(GraphKernel {
        name: "katz",
        matrix: k,
    })
}

/// Rooted PageRank kernel `K = (1 - alpha) (I - alpha D^-1 A)^-1`.
/// Row x holds the stationary distribution of a random walk from x that
/// restarts at x with probability `1 - alpha`; every row sums to 1. The
/// matrix is not symmetric, so scoring averages `K[x,y]` and `K[y,x]`.
pub fn rooted_pagerank_kernel(graph: &Graph, alpha: f64, guard_limit: usize) -> Result<GraphKernel> {
    guard(graph, guard_limit)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!(
            "rooted pagerank alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = graph.vertex_count();
    if (0..n).any(|v| graph.degree(v as VertexId) == 0) {
        return Err(Error::input(
            "rooted pagerank requires every vertex to have at least one edge",
        ));
    }
    let mut m = DMatrix::identity(n, n);
    for x in 0..n {
        let w = alpha / graph.degree(x as VertexId) as f64;
        for &u in graph.neighbors(x as VertexId) {
            m[(x, u as usize)] = -w;
        }
    }
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::input("rooted pagerank system is singular"))?;
    Ok(GraphKernel {
        name: "rooted_pagerank",
        matrix: inv * (1.0 - alpha),
    })
}

/// Effective resistance scores: `K[x,y] = -r(x,y)` where
/// `r(x,y) = L+[x,x] + L+[y,y] - 2 L+[x,y]` and `L+` is the Laplacian
/// pseudoinverse, computed exactly as `inv(L + J/n) - J/n` on a connected
/// graph. Negation makes closer (lower-resistance) pairs score higher.
pub fn resistance_kernel(graph: &Graph, guard_limit: usize) -> Result<GraphKernel> {
    guard(graph, guard_limit)?;
    if !graph.is_connected() {
        return Err(Error::Disconnected {
            operation: "resistance kernel",
        });
    }
    let n = graph.vertex_count();
    let jn = 1.0 / n as f64;
    let mut m = graph.laplacian().to_dense();
    for x in 0..n {
        for y in 0..n {
            m[(x, y)] += jn;
        }
    }
    let mut pinv = m
        .try_inverse()
        .ok_or_else(|| Error::input("resistance system is singular"))?;
    for x in 0..n {
        for y in 0..n {
            pinv[(x, y)] -= jn;
        }
    }
    let mut k = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                k[(x, y)] = -(pinv[(x, x)] + pinv[(y, y)] - 2.0 * pinv[(x, y)]);
            }
        }
    }
    Ok(GraphKernel {
        name: "resistance",
        matrix: k,
    })
}

/// Negated BFS distances; unreachable pairs get negative infinity and are
/// never predicted.
pub fn shortest_path_kernel(graph: &Graph, guard_limit: usize) -> Result<GraphKernel> {
    guard(graph, guard_limit)?;
    let n = graph.vertex_count();
    let mut k = DMatrix::from_element(n, n, f64::NEG_INFINITY);
    let mut dist = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        dist.fill(u32::MAX);
        dist[s] = 0;
        queue.push_back(s as VertexId);
        while let Some(x) = queue.pop_front() {
            let next = dist[x as usize] + 1;
            for &y in graph.neighbors(x) {
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = next;
                    queue.push_back(y);
                }
            }
        }
        for (t, &d) in dist.iter().enumerate() {
            if d != u32::MAX {
                k[(s, t)] = -(d as f64);
            }
        }
        k[(s, s)] = 0.0;
    }
    Ok(GraphKernel {
        name: "shortest_path",
        matrix: k,
    })
}

/// Ranks all non-adjacent pairs by the kernel score. Pairs scored negative
/// infinity (disconnected under the kernel) are skipped entirely.
pub fn predict_from_kernel(
    graph: &Graph,
    kernel: &GraphKernel,
    k: usize,
    allow_large_k: bool,
) -> Result<Vec<ScoredPair>> {
    if kernel.order() != graph.vertex_count() {
        return Err(Error::input(format!(
            "kernel order {} does not match graph order {}",
            kernel.order(),
            graph.vertex_count()
        )));
    }
    validate_k(graph, k, allow_large_k)?;
    let n = graph.vertex_count() as VertexId;
    let mut best = TopScores::new(k);
    for x in 0..n {
        for y in (x + 1)..n {
            if graph.has_edge(x, y) {
                continue;
            }
            let score = kernel.pair_score(x, y);
            if score != f64::NEG_INFINITY {
                best.offer(ScoredPair { x, y, score });
            }
        }
    }
    Ok(best.into_sorted())
}

#[derive(Debug, Clone, Copy)]
enum KernelKind {
    Katz,
    RootedPageRank,
    Resistance,
    ShortestPath,
}

/// Kernel-backed implementation of [`LinkPredictor`]; the kernel is built
/// fresh on every call so the predictor itself stays cheap to construct.
pub(super) struct KernelPredictor {
    kind: KernelKind,
    beta: f64,
    alpha: f64,
    guard_limit: usize,
    allow_large_k: bool,
}

impl KernelPredictor {
    fn new(kind: KernelKind, params: &PredictorParams) -> KernelPredictor {
        KernelPredictor {
            kind,
            beta: params.beta,
            alpha: params.alpha,
            guard_limit: params.dense_guard,
            allow_large_k: params.allow_large_k,
        }
    }

    pub(super) fn katz(params: &PredictorParams) -> KernelPredictor {
        KernelPredictor::new(KernelKind::Katz, params)
    }

    pub(super) fn rooted_pagerank(params: &PredictorParams) -> KernelPredictor {
        KernelPredictor::new(KernelKind::RootedPageRank, params)
    }

    pub(super) fn resistance(params: &PredictorParams) -> KernelPredictor {
        KernelPredictor::new(KernelKind::Resistance, params)
    }

    pub(super) fn shortest_path(params: &PredictorParams) -> KernelPredictor {
        KernelPredictor::new(KernelKind::ShortestPath, params)
    }

    fn build(&self, graph: &Graph) -> Result<GraphKernel> {
        match self.kind {
            KernelKind::Katz => katz_kernel(graph, self.beta, self.guard_limit),
            KernelKind::RootedPageRank => {
                rooted_pagerank_kernel(graph, self.alpha, self.guard_limit)
            }
            KernelKind::Resistance => resistance_kernel(graph, self.guard_limit),
            KernelKind::ShortestPath => shortest_path_kernel(graph, self.guard_limit),
        }
    }
}

impl LinkPredictor for KernelPredictor {
    fn name(&self) -> String {
        match self.kind {
            KernelKind::Katz => "katz",
            KernelKind::RootedPageRank => "rooted_pagerank",
            KernelKind::Resistance => "resistance",
            KernelKind::ShortestPath => "shortest_path",
        }
        .to_string()
    }

    fn predict(&self, graph: &Graph, k: usize) -> Result<Vec<ScoredPair>> {
        validate_k(graph, k, self.allow_large_k)?;
        let kernel = self.build(graph)?;
        predict_from_kernel(graph, &kernel, k, self.allow_large_k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    /// Truncated Katz series `sum of beta^i A^i` for `i = 1..=terms`.
    fn katz_series(graph: &Graph, beta: f64, terms: usize) -> DMatrix<f64> {
        let n = graph.vertex_count();
        let a = graph.adjacency_dense();
        let mut power = DMatrix::<f64>::identity(n, n);
        let mut sum = DMatrix::<f64>::zeros(n, n);
        for _ in 0..terms {
            power = (&a * power) * beta;
            sum += &power;
        }
        sum
    }

    #[test]
    fn katz_matches_truncated_series() {
        let g = synth::random_connected(30, 40, 17);
        let beta = 0.25 / spectral_radius_estimate(&g);
        let kernel = katz_kernel(&g, beta, 5000).unwrap();
        let series = katz_series(&g, beta, 60);
        let diff = (kernel.matrix() - series).abs().max();
        assert!(diff < 1e-10, "max deviation {diff}");
    }

    #[test]
    fn katz_diverges_above_radius() {
        let g = synth::random_connected(20, 30, 3);
        let rho = spectral_radius_estimate(&g);
        let err = katz_kernel(&g, 1.5 / rho, 5000).unwrap_err();
        assert!(matches!(err, Error::DivergentSeries { .. }));
        assert!(matches!(
            katz_kernel(&g, -0.1, 5000).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn spectral_radius_on_known_graphs() {
        // Complete graph K_n has radius n - 1; the path P_3 (bipartite)
        // has radius sqrt(2).
        let mut edges = Vec::new();
        for u in 0..6u32 {
            for v in (u + 1)..6 {
                edges.push((u, v));
            }
        }
        let k6 = Graph::from_edges(6, &edges).unwrap();
        assert!((spectral_radius_estimate(&k6) - 5.0).abs() < 1e-9);
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((spectral_radius_estimate(&p3) - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rooted_pagerank_rows_sum_to_one() {
        let g = synth::random_connected(40, 60, 23);
        let kernel = rooted_pagerank_kernel(&g, 0.15, 5000).unwrap();
        for x in 0..40 {
            let sum: f64 = kernel.matrix().row(x).sum();
            assert!((sum - 1.0).abs() < 1e-10, "row {x} sums to {sum}");
        }
        // Restart mass stays home: diagonal dominates its row.
        for x in 0..40 {
            let diag = kernel.matrix()[(x, x)];
            assert!(diag >= 1.0 - 0.15);
        }
    }

    #[test]
    fn rooted_pagerank_rejects_bad_inputs() {
        let g = synth::random_connected(10, 5, 1);
        assert!(matches!(
            rooted_pagerank_kernel(&g, 1.5, 5000).unwrap_err(),
            Error::Config(_)
        ));
        let isolated = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(rooted_pagerank_kernel(&isolated, 0.15, 5000).is_err());
    }

    #[test]
    fn resistance_on_small_circuits() {
        // Two vertices, one edge: r = 1. Triangle: r = 2/3 per pair.
        // Path of length 2: r(0,2) = 2.
        let single = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let k = resistance_kernel(&single, 5000).unwrap();
        assert!((k.pair_score(0, 1) + 1.0).abs() < 1e-10);

        let triangle = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let k = resistance_kernel(&triangle, 5000).unwrap();
        for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            assert!((k.pair_score(x, y) + 2.0 / 3.0).abs() < 1e-10);
        }

        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let k = resistance_kernel(&path, 5000).unwrap();
        assert!((k.pair_score(0, 2) + 2.0).abs() < 1e-10);
    }

    #[test]
    fn resistance_requires_connectivity() {
        let split = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            resistance_kernel(&split, 5000).unwrap_err(),
            Error::Disconnected { .. }
        ));
    }

    #[test]
    fn kernels_are_symmetric() {
        let g = synth::random_connected(25, 35, 31);
        for kernel in [
            katz_kernel(&g, 0.05, 5000).unwrap(),
            resistance_kernel(&g, 5000).unwrap(),
            shortest_path_kernel(&g, 5000).unwrap(),
        ] {
            let m = kernel.matrix();
            let asym = (m - m.transpose()).abs().max();
            assert!(asym <= 1e-10, "{} asymmetry {asym}", kernel.name());
        }
    }

    #[test]
    fn shortest_path_prefers_close_pairs_and_skips_unreachable() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let kernel = shortest_path_kernel(&g, 5000).unwrap();
        let got = predict_from_kernel(&g, &kernel, 3, false).unwrap();
        // Distance-2 pairs first (score -2), lexicographic within the tie;
        // vertex 4 is isolated, so its pairs never appear.
        assert_eq!(
            got.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(),
            vec![(0, 2), (1, 3), (0, 3)]
        );
        assert!(got.iter().all(|p| p.y != 4));
    }

    #[test]
    fn size_guard_blocks_large_graphs() {
        let g = synth::random_connected(30, 10, 2);
        let err = katz_kernel(&g, 0.01, 29).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { vertices: 30, limit: 29 }));
        assert!(err.to_string().contains("dense-guard"));
    }

    #[test]
    fn kernel_predictor_end_to_end() {
        let g = synth::random_connected(30, 45, 8);
        let params = PredictorParams::default();
        let predictor = KernelPredictor::katz(&params);
        let got = predictor.predict(&g, 10).unwrap();
        assert_eq!(got.len(), 10);
        // Ranking is descending with lexicographic ties.
        for w in got.windows(2) {
            assert!(super::super::rank_cmp(&w[0], &w[1]) == std::cmp::Ordering::Less);
        }
        // Brute force over the same kernel agrees.
        let kernel = katz_kernel(&g, params.beta, params.dense_guard).unwrap();
        let mut all = Vec::new();
        for x in 0..30u32 {
            for y in (x + 1)..30 {
                if !g.has_edge(x, y) {
                    all.push(ScoredPair { x, y, score: kernel.pair_score(x, y) });
                }
            }
        }
        all.sort_by(super::super::rank_cmp);
        all.truncate(10);
        assert_eq!(got, all);
    }
}
