//! Compressed sparse row storage for simple undirected graphs.
//!
//! Vertices are dense integer ids in `[0, n)`. External string labels are
//! remapped during ingest (see [`crate::dataset`]) and kept out of this
//! module so every algorithm works on plain integer ids. Neighbor lists are
//! sorted, which makes adjacency tests a binary search and set
//! intersections a linear merge.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::{Error, Result};

/// Dense vertex id. Graphs are limited to `u32::MAX` vertices.
pub type VertexId = u32;

/// Immutable simple undirected graph in CSR form.
///
/// Self-loops are dropped and duplicate edges collapsed at construction, so
/// `edge_count` always counts distinct unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    /// `offsets[v]..offsets[v + 1]` indexes `neighbors` for vertex `v`.
    offsets: Vec<usize>,
    /// Concatenated sorted neighbor lists, one entry per edge direction.
    neighbors: Vec<VertexId>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices from unordered endpoint pairs.
    ///
    /// Pairs may appear in any order and direction; duplicates collapse and
    /// self-loops are discarded. Ids at or above `n` are an input error.
    pub fn from_edges(n: usize, pairs: &[(VertexId, VertexId)]) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::input(format!("vertex count {n} exceeds u32 range")));
        }
        let mut canonical: Vec<(VertexId, VertexId)> = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u as usize >= n || v as usize >= n {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) references a vertex outside [0, {n})"
                )));
            }
            if u == v {
                continue;
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        canonical.dedup();

        let mut degrees = vec![0usize; n];
        for &(u, v) in &canonical {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        offsets.push(0);
        for d in &degrees {
            total += d;
            offsets.push(total);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0 as VertexId; total];
        for &(u, v) in &canonical {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        // Rows were filled from a sorted pair list: the u-side entries of row u
        // arrive in increasing v, but the v-side entries interleave, so sort
        // each row once here.
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(Graph {
            offsets,
            neighbors,
            edge_count: canonical.len(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.degree(v as VertexId))
            .max()
            .unwrap_or(0)
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return false;
        }
        // Search the shorter list.
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// All edges as canonical pairs `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Number of shared neighbors, by merging the two sorted lists.
    pub fn common_neighbor_count(&self, u: VertexId, v: VertexId) -> usize {
        self.common_neighbors(u, v).count()
    }

    /// Shared neighbors of `u` and `v` in ascending id order.
    pub fn common_neighbors<'g>(
        &'g self,
        u: VertexId,
        v: VertexId,
    ) -> impl Iterator<Item = VertexId> + 'g {
        SortedIntersection {
            a: self.neighbors(u),
            b: self.neighbors(v),
        }
    }

    /// Unweighted shortest path length between `u` and `v`, or `None` when
    /// they are in different components. A vertex is at distance 0 from
    /// itself.
    pub fn shortest_path_length(&self, u: VertexId, v: VertexId) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        let n = self.vertex_count();
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[u as usize] = 0;
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            let next = dist[x as usize] + 1;
            for &y in self.neighbors(x) {
                if dist[y as usize] == usize::MAX {
                    if y == v {
                        return Some(next);
                    }
                    dist[y as usize] = next;
                    queue.push_back(y);
                }
            }
        }
        None
    }

    /// Component id per vertex. Ids are assigned in order of each
    /// component's smallest vertex, so vertex 0 is always in component 0.
    pub fn components(&self) -> Vec<u32> {
        let n = self.vertex_count();
        let mut comp = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != u32::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start as VertexId);
            while let Some(x) = stack.pop() {
                for &y in self.neighbors(x) {
                    if comp[y as usize] == u32::MAX {
                        comp[y as usize] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        n <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Combinatorial Laplacian `L = D - A` of this graph as a matrix-free view.
    pub fn laplacian(&self) -> LaplacianView<'_> {
        LaplacianView { graph: self }
    }

    /// Dense adjacency matrix. Intended for dense kernels and small oracles;
    /// allocates `n * n` doubles.
    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut a = DMatrix::zeros(n, n);
        for (u, v) in self.edges() {
            a[(u as usize, v as usize)] = 1.0;
            a[(v as usize, u as usize)] = 1.0;
        }
        a
    }
}

struct SortedIntersection<'g> {
    a: &'g [VertexId],
    b: &'g [VertexId],
}

impl<'g> Iterator for SortedIntersection<'g> {
    type Item = VertexId;

    fn next(&mut self) -> Option<VertexId> {
        while let (Some(&x), Some(&y)) = (self.a.first(), self.b.first()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => self.a = &self.a[1..],
                std::cmp::Ordering::Greater => self.b = &self.b[1..],
                std::cmp::Ordering::Equal => {
                    self.a = &self.a[1..];
                    self.b = &self.b[1..];
                    return Some(x);
                }
            }
        }
        None
    }
}

/// Matrix-free view of the combinatorial Laplacian `L = D - A`.
///
/// `L` is symmetric positive semidefinite with row sums zero; the all-ones
/// vector spans its nullspace exactly when the graph is connected. The view
/// borrows the graph, so it costs nothing to construct.
pub struct LaplacianView<'g> {
    graph: &'g Graph,
}

/// Row count below which `matvec` stays sequential; splitting tiny products
/// across threads costs more than the multiply itself.
const PAR_MATVEC_MIN_ROWS: usize = 1 << 14;

impl<'g> LaplacianView<'g> {
    pub fn order(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.graph.degree(v)
    }

    /// `out = L * x`. Rows are computed independently (in parallel for large
    /// graphs) and each row accumulates neighbors in ascending id order, so
    /// results are bitwise deterministic regardless of thread count.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.order();
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        let row = |v: usize, out_v: &mut f64| {
            let neighbors = self.graph.neighbors(v as VertexId);
            let mut acc = 0.0;
            for &u in neighbors {
                acc += x[u as usize];
            }
            *out_v = neighbors.len() as f64 * x[v] - acc;
        };
        if n >= PAR_MATVEC_MIN_ROWS {
            out.par_iter_mut().enumerate().for_each(|(v, o)| row(v, o));
        } else {
            for (v, o) in out.iter_mut().enumerate() {
                row(v, o);
            }
        }
    }

    /// `x^T L x`, the Laplacian quadratic form `sum over edges of
    /// (x_u - x_v)^2`. Always nonnegative.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.graph
            .edges()
            .map(|(u, v)| {
                let d = x[u as usize] - x[v as usize];
                d * d
            })
            .sum()
    }

    /// Dense `L`. Intended for small oracles and dense kernels.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut l = DMatrix::zeros(n, n);
        for v in 0..n {
            l[(v, v)] = self.graph.degree(v as VertexId) as f64;
        }
        for (u, v) in self.graph.edges() {
            l[(u as usize, v as usize)] = -1.0;
            l[(v as usize, u as usize)] = -1.0;
        }
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k4_minus_edge() -> Graph {
        // Complete graph on {0,1,2,3} without the (0,1) edge.
        Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn builds_and_collapses_duplicates() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 0), (0, 1), (2, 2)]).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
        assert_eq!(g.neighbors(2), &[] as &[VertexId]);
    }

    #[test]
    fn rejects_out_of_range_ids() {
        let err = Graph::from_edges(2, &[(0, 2)]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn adjacency_queries() {
        let g = k4_minus_edge();
        assert!(!g.has_edge(0, 1));
        assert!(g.has_edge(1, 2));
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(1, 1));
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(2), 3);
        assert_eq!(g.common_neighbor_count(0, 1), 2);
        assert_eq!(g.common_neighbors(0, 1).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn shortest_paths_and_connectivity() {
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(path.shortest_path_length(0, 3), Some(3));
        assert_eq!(path.shortest_path_length(2, 2), Some(0));
        assert!(path.is_connected());

        let split = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(split.shortest_path_length(0, 3), None);
        assert!(!split.is_connected());
        assert_eq!(split.components(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn laplacian_matches_dense_definition() {
        let g = k4_minus_edge();
        let lap = g.laplacian();
        let dense = lap.to_dense();
        for v in 0..4 {
            assert_eq!(dense.row(v).sum(), 0.0);
        }
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut out = [0.0; 4];
        lap.matvec(&x, &mut out);
        for v in 0..4 {
            let expected: f64 = (0..4).map(|u| dense[(v, u)] * x[u]).sum();
            assert!((out[v] - expected).abs() < 1e-12);
        }
    }

    fn arbitrary_graph() -> impl Strategy<Value = Graph> {
        (2usize..40).prop_flat_map(|n| {
            let max = (n * (n - 1)) / 2;
            proptest::collection::vec((0..n as u32, 0..n as u32), 0..=max.min(80))
                .prop_map(move |pairs| Graph::from_edges(n, &pairs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn neighbor_lists_sorted_and_degree_sum_matches(g in arbitrary_graph()) {
            let mut degree_sum = 0usize;
            for v in 0..g.vertex_count() as u32 {
                let ns = g.neighbors(v);
                prop_assert!(ns.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(ns.iter().all(|&u| u != v));
                degree_sum += ns.len();
            }
            prop_assert_eq!(degree_sum, 2 * g.edge_count());
        }

        #[test]
        fn has_edge_is_symmetric_and_matches_lists(g in arbitrary_graph()) {
            let n = g.vertex_count() as u32;
            for u in 0..n {
                for v in 0..n {
                    let listed = g.neighbors(u).contains(&v);
                    prop_assert_eq!(g.has_edge(u, v), listed);
                    prop_assert_eq!(g.has_edge(u, v), g.has_edge(v, u));
                }
            }
        }

        #[test]
        fn quadratic_form_nonnegative_and_matches_matvec(
            g in arbitrary_graph(),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let n = g.vertex_count();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lap = g.laplacian();
            let q = lap.quadratic_form(&x);
            prop_assert!(q >= 0.0);
            let mut lx = vec![0.0; n];
            lap.matvec(&x, &mut lx);
            let dot: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
            prop_assert!((q - dot).abs() <= 1e-9 * q.abs().max(1.0));
        }
    }
}
