//! Exact k-closest-pair search over low-dimensional point sets.
//!
//! [`k_closest_pairs`] returns the k smallest-distance unordered pairs
//! without scanning all `n(n-1)/2` pairs. Every point asks a kd-tree for
//! its nearest neighbors, the per-point lists merge into a candidate pool,
//! and any point whose list does not yet reach strictly past the k-th best
//! candidate grows its list geometrically and asks again. All queries are
//! clamped to the k-th smallest distance among pairs sharing a leaf, a
//! cheaply sampled upper bound on the answer's worst pair, which keeps
//! every search ball tiny. At termination each point either lists all its
//! partners within the clamp or reaches past the k-th candidate, so a pair
//! absent from the pool provably ranks after the k-th candidate and the
//! pool holds the exact answer. Results are identical to brute force,
//! including tie order: pair distances all flow through one accumulation
//! routine, candidate selection uses the one total order, and pruning
//! discards only boxes and partial sums strictly beyond a bound.
//!
//! [`k_closest_pairs_excluding`] skips a caller-supplied pair set by
//! filtering inside the tree queries themselves, so excluded pairs never
//! occupy list slots and the same coverage argument applies to the
//! non-excluded pairs directly.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::{Error, Result};

/// Point index within a [`PointSet`].
pub type PointId = u32;

/// Dense row-major point set in `R^dim`.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Wraps row-major coordinates. Every coordinate must be finite and the
    /// buffer length a multiple of `dim`.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<PointSet> {
        if dim == 0 {
            return Err(Error::input("point dimension must be positive"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::input(format!(
                "coordinate buffer length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        if n > u32::MAX as usize {
            return Err(Error::input(format!("point count {n} exceeds u32 range")));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::input(format!(
                "coordinate {} of point {} is not finite",
                bad % dim,
                bad / dim
            )));
        }
        Ok(PointSet { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: PointId) -> &[f64] {
        &self.coords[i as usize * self.dim..(i as usize + 1) * self.dim]
    }
}

/// An unordered point pair with `i < j` and its squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosePair {
    pub i: PointId,
    pub j: PointId,
    pub dist_sq: f64,
}

impl ClosePair {
    pub fn distance(&self) -> f64 {
        self.dist_sq.sqrt()
    }

    /// Sort key: squared distance first, then lexicographic pair order.
    fn key(&self) -> (f64, PointId, PointId) {
        (self.dist_sq, self.i, self.j)
    }
}

/// Total order on pairs: ascending squared distance, ties by lexicographic
/// pair order.
pub fn pair_cmp(a: &ClosePair, b: &ClosePair) -> Ordering {
    let (da, ia, ja) = a.key();
    let (db, ib, jb) = b.key();
    da.total_cmp(&db).then(ia.cmp(&ib)).then(ja.cmp(&jb))
}

/// Squared Euclidean distance, accumulated in dimension order. Every
/// distance in this module flows through this one function so comparisons
/// are bitwise consistent; oracles that use it too can expect exact
/// equality with search results.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// [`dist_sq`] with an early exit: `None` once the running sum passes
/// `cap`. Terms are nonnegative, so a partial sum past the cap proves the
/// full distance is past it too. A returned value is accumulated in the
/// identical order, so its bits match [`dist_sq`] exactly.
fn dist_sq_capped(a: &[f64], b: &[f64], cap: f64) -> Option<f64> {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

/// The `k` closest unordered pairs, ascending by `(dist_sq, i, j)`.
///
/// Returns exactly `min(k, n(n-1)/2)` pairs. `k` must be positive.
pub fn k_closest_pairs(points: &PointSet, k: usize) -> Result<Vec<ClosePair>> {
    search(points, k, &HashSet::new())
}

/// Like [`k_closest_pairs`] but pairs in `excluded` never appear in the
/// result: the search skips them internally, so the answer is the k closest
/// pairs among the non-excluded ones. Pair order inside the set does not
/// matter; self-pairs are ignored.
pub fn k_closest_pairs_excluding(
    points: &PointSet,
    k: usize,
    excluded: &HashSet<(PointId, PointId)>,
) -> Result<Vec<ClosePair>> {
    let n = points.len();
    let mut canonical: HashSet<(PointId, PointId)> = HashSet::with_capacity(excluded.len());
    for &(a, b) in excluded {
        if a as usize >= n || b as usize >= n {
            return Err(Error::input(format!(
                "excluded pair ({a}, {b}) references a point outside [0, {n})"
            )));
        }
        if a != b {
            canonical.insert((a.min(b), a.max(b)));
        }
    }
    search(points, k, &canonical)
}

const BRUTE_FORCE_MAX_POINTS: usize = 64;
const LEAF_SIZE: usize = 32;

/// Shared entry: `excluded` holds canonical `(min, max)` pairs only.
fn search(
    points: &PointSet,
    k: usize,
    excluded: &HashSet<(PointId, PointId)>,
) -> Result<Vec<ClosePair>> {
    if k == 0 {
        return Err(Error::input("pair count k must be positive"));
    }
    let n = points.len();
    let total = n * n.saturating_sub(1) / 2;
    let available = total - excluded.len();
    if available == 0 {
        return Ok(Vec::new());
    }
    // Tiny inputs and exhaustive requests gain nothing from the tree.
    if n <= BRUTE_FORCE_MAX_POINTS || k >= available {
        return Ok(brute_force(points, k, excluded));
    }
    Ok(KdTree::build(points).k_closest(points, k, excluded))
}

fn brute_force(
    points: &PointSet,
    k: usize,
    excluded: &HashSet<(PointId, PointId)>,
) -> Vec<ClosePair> {
    let n = points.len() as PointId;
    let mut best = BoundedWorst::new(k);
    for i in 0..n {
        let pi = points.point(i);
        for j in (i + 1)..n {
            if excluded.contains(&(i, j)) {
                continue;
            }
            best.offer(ClosePair {
                i,
                j,
                dist_sq: dist_sq(pi, points.point(j)),
            });
        }
    }
    best.into_sorted()
}

/// Keeps the k best pairs seen so far; the heap root is the current worst,
/// so an offer beats the bar only when strictly smaller under the tie order.
struct BoundedWorst {
    k: usize,
    heap: BinaryHeap<WorstFirst>,
}

struct WorstFirst(ClosePair);

impl PartialEq for WorstFirst {
    fn eq(&self, other: &Self) -> bool {
        pair_cmp(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for WorstFirst {}
impl PartialOrd for WorstFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for WorstFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        pair_cmp(&self.0, &other.0)
    }
}

impl BoundedWorst {
    fn new(k: usize) -> BoundedWorst {
        BoundedWorst {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, pair: ClosePair) {
        if self.heap.len() < self.k {
            self.heap.push(WorstFirst(pair));
        } else if let Some(worst) = self.heap.peek() {
            if pair_cmp(&pair, &worst.0) == Ordering::Less {
                self.heap.pop();
                self.heap.push(WorstFirst(pair));
            }
        }
    }

    fn into_sorted(self) -> Vec<ClosePair> {
        let mut pairs: Vec<ClosePair> = self.heap.into_iter().map(|w| w.0).collect();
        pairs.sort_unstable_by(pair_cmp);
        pairs
    }
}

struct Node {
    /// Range of tree-order positions covered by this node.
    lo: usize,
    hi: usize,
    /// Child node indices; `u32::MAX` marks a leaf.
    left: u32,
    right: u32,
}

const NO_CHILD: u32 = u32::MAX;

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == NO_CHILD
    }
}

struct KdTree {
    dim: usize,
    nodes: Vec<Node>,
    /// Bounding boxes, flat by node id: `dim` minima then `dim` maxima.
    bbox: Vec<f64>,
    /// Coordinates permuted into tree order so leaf scans are contiguous.
    coords: Vec<f64>,
    /// Original point index for each tree-order position.
    orig: Vec<PointId>,
}

impl KdTree {
    fn build(points: &PointSet) -> KdTree {
        let n = points.len();
        let dim = points.dim();
        let mut order: Vec<PointId> = (0..n as PointId).collect();
        let mut tree = KdTree {
            dim,
            nodes: Vec::with_capacity(2 * (n / LEAF_SIZE + 1)),
            bbox: Vec::with_capacity(4 * dim * (n / LEAF_SIZE + 1)),
            coords: Vec::new(),
            orig: Vec::new(),
        };
        tree.build_node(points, &mut order, 0, n);
        tree.orig = order;
        let mut coords = Vec::with_capacity(n * dim);
        for &p in &tree.orig {
            coords.extend_from_slice(points.point(p));
        }
        tree.coords = coords;
        tree
    }

    fn build_node(&mut self, points: &PointSet, order: &mut [PointId], lo: usize, hi: usize) -> u32 {
        let dim = self.dim;
        let mut bbox_min = vec![f64::INFINITY; dim];
        let mut bbox_max = vec![f64::NEG_INFINITY; dim];
        for &p in &order[lo..hi] {
            for (t, &c) in points.point(p).iter().enumerate() {
                bbox_min[t] = bbox_min[t].min(c);
                bbox_max[t] = bbox_max[t].max(c);
            }
        }
        let (widest, extent) = bbox_max
            .iter()
            .zip(&bbox_min)
            .map(|(hi, lo)| hi - lo)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (t, e)| {
                if e > best.1 {
                    (t, e)
                } else {
                    best
                }
            });
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            lo,
            hi,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        self.bbox.extend_from_slice(&bbox_min);
        self.bbox.extend_from_slice(&bbox_max);
        // A box with no extent holds only coincident points; splitting it
        // cannot separate anything.
        if hi - lo <= LEAF_SIZE || extent <= 0.0 {
            return id;
        }
        let mid = lo + (hi - lo) / 2;
        // The secondary index key makes the comparator a strict total order,
        // so the median split is balanced even with duplicate coordinates.
        order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            points.point(a)[widest]
                .total_cmp(&points.point(b)[widest])
                .then(a.cmp(&b))
        });
        let left = self.build_node(points, order, lo, mid);
        let right = self.build_node(points, order, mid, hi);
        self.nodes[id as usize].left = left;
        self.nodes[id as usize].right = right;
        id
    }

    fn point(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Smallest squared distance from `q` to node `a`'s box, accumulated in
    /// dimension order like [`dist_sq`], so the bound never exceeds the
    /// distance to any point the box contains.
    fn box_dist_to_point(&self, a: u32, q: &[f64]) -> f64 {
        let base = a as usize * 2 * self.dim;
        let mins = &self.bbox[base..base + self.dim];
        let maxs = &self.bbox[base + self.dim..base + 2 * self.dim];
        let mut acc = 0.0;
        for t in 0..self.dim {
            let gap = (mins[t] - q[t]).max(q[t] - maxs[t]);
            if gap > 0.0 {
                acc += gap * gap;
            }
        }
        acc
    }

    /// Up to `m` nearest partners of `q` within squared distance `clamp`,
    /// ascending by `(dist_sq, id)`, skipping excluded partners inside the
    /// traversal. The flag reports a complete list: every partner within
    /// the clamp is present.
    fn nearest(
        &self,
        q: PointId,
        qc: &[f64],
        m: usize,
        clamp: f64,
        excluded: &ExclusionIndex,
        stats: &mut SearchStats,
    ) -> (Vec<(f64, PointId)>, bool) {
        let mut best = NearestSet::new(m);
        self.nearest_descend(0, q, qc, clamp, excluded.row(q), &mut best, stats);
        let list = best.into_sorted();
        // Fewer hits than requested means nothing within the clamp was
        // missed; a request covering all other points means the same.
        let complete = list.len() < m || m >= self.orig.len() - 1;
        (list, complete)
    }

    #[allow(clippy::too_many_arguments)]
    fn nearest_descend(
        &self,
        node: u32,
        q: PointId,
        qc: &[f64],
        clamp: f64,
        excluded_row: &[PointId],
        best: &mut NearestSet,
        stats: &mut SearchStats,
    ) {
        let nd = &self.nodes[node as usize];
        stats.nodes += 1;
        if nd.is_leaf() {
            stats.leaves += 1;
            for p in nd.lo..nd.hi {
                let j = self.orig[p];
                if j == q || excluded_row.binary_search(&j).is_ok() {
                    continue;
                }
                // Candidates past the clamp are never needed (the answer
                // lies within it, and completeness is judged against it),
                // and ones past the current bar lose to every kept entry,
                // so the distance loop can stop the moment either is passed.
                let limit = best.bar().min(clamp);
                if let Some(d) = dist_sq_capped(qc, self.point(p), limit) {
                    best.offer(d, j);
                }
            }
            return;
        }
        // Nearer child first; the bar can only tighten, so re-check before
        // the farther child. Equal bounds must still be visited: the box may
        // hold a point that wins on index order.
        let (dl, dr) = (
            self.box_dist_to_point(nd.left, qc),
            self.box_dist_to_point(nd.right, qc),
        );
        let (first, fd, second, sd) = if dl <= dr {
            (nd.left, dl, nd.right, dr)
        } else {
            (nd.right, dr, nd.left, dl)
        };
        if fd <= best.bar().min(clamp) {
            self.nearest_descend(first, q, qc, clamp, excluded_row, best, stats);
        }
        if sd <= best.bar().min(clamp) {
            self.nearest_descend(second, q, qc, clamp, excluded_row, best, stats);
        }
    }

    /// Squared-distance clamp for the whole search: the k-th smallest
    /// non-excluded distance among pairs that share a leaf. Those pairs are
    /// a subset of all pairs, so this is at least the true k-th smallest
    /// distance, and leaf mates are spatially close, so it is rarely far
    /// above it. Infinity when the leaves hold fewer than k pairs.
    fn leaf_pair_clamp(&self, k: usize, excluded: &ExclusionIndex) -> f64 {
        let mut sample: Vec<f64> = Vec::new();
        for nd in self.nodes.iter().filter(|nd| nd.is_leaf()) {
            for p in nd.lo..nd.hi {
                let a = self.orig[p];
                let pa = self.point(p);
                let row = excluded.row(a);
                for q in (p + 1)..nd.hi {
                    let b = self.orig[q];
                    if row.binary_search(&b).is_ok() {
                        continue;
                    }
                    sample.push(dist_sq(pa, self.point(q)));
                }
            }
        }
        if sample.len() < k {
            return f64::INFINITY;
        }
        *sample.select_nth_unstable_by(k - 1, f64::total_cmp).1
    }

    /// Exact k-closest search driven by per-point neighbor lists.
    ///
    /// Every point holds a nearest-neighbor list, exact within a fixed
    /// squared-distance clamp that provably contains the answer. Lists merge
    /// into a deduplicated candidate pool; a point whose full list does not
    /// reach strictly past the pool's k-th best squared distance doubles its
    /// request and queries again. At termination every point either lists
    /// all partners within the clamp or reaches past the k-th candidate, so
    /// a missing pair is either beyond the clamp or beyond both endpoints'
    /// lists, and in both cases it ranks strictly after the k-th candidate.
    /// The clamp keeps each query's search ball small, and the doubling
    /// schedule keeps total query work within a constant factor of the
    /// final list sizes.
    fn k_closest(
        &self,
        points: &PointSet,
        k: usize,
        excluded: &HashSet<(PointId, PointId)>,
    ) -> Vec<ClosePair> {
        let n = points.len();
        let trace = std::env::var_os("LINKPRED_SEARCH_TRACE").is_some();
        let mut stats = SearchStats::default();
        let index = ExclusionIndex::new(n, excluded);
        let clamp = self.leaf_pair_clamp(k, &index);
        let cap = n - 1;
        let start = 8usize.max((2 * k).div_ceil(n) + 2).min(cap);
        let mut want = vec![start; n];
        let mut lists: Vec<Vec<(f64, PointId)>> = vec![Vec::new(); n];
        let mut complete = vec![false; n];
        let mut needs = vec![true; n];
        let mut round = 0usize;
        loop {
            round += 1;
            // Queries go in tree order: neighboring queries then walk
            // overlapping parts of the tree.
            for pos in 0..n {
                let i = self.orig[pos];
                if !needs[i as usize] {
                    continue;
                }
                let (list, done) = self.nearest(
                    i,
                    points.point(i),
                    want[i as usize],
                    clamp,
                    &index,
                    &mut stats,
                );
                lists[i as usize] = list;
                complete[i as usize] = done;
            }
            let mut pool: Vec<ClosePair> = Vec::with_capacity(lists.iter().map(Vec::len).sum());
            for (i, list) in lists.iter().enumerate() {
                let i = i as PointId;
                for &(d, j) in list {
                    pool.push(ClosePair {
                        i: i.min(j),
                        j: i.max(j),
                        dist_sq: d,
                    });
                }
            }
            // A pair found from both endpoints carries the same distance
            // bits, so duplicates are adjacent after the sort.
            pool.sort_unstable_by(pair_cmp);
            pool.dedup_by(|a, b| a.i == b.i && a.j == b.j);
            let bar = pool.get(k - 1).map(|c| c.dist_sq);
            let mut growing = 0usize;
            for i in 0..n {
                needs[i] = false;
                if complete[i] {
                    continue;
                }
                let last = lists[i].last().map_or(0.0, |&(d, _)| d);
                // A tie with the bar still grows the list: an unfetched pair
                // at the same distance could win on index order.
                if bar.map_or(true, |b| last <= b) {
                    want[i] = (want[i] * 2).min(cap);
                    needs[i] = true;
                    growing += 1;
                }
            }
            if trace {
                eprintln!(
                    "search round {round}: pool {}, bar {:?}, growing {growing}, \
                     nodes {}, leaves {}",
                    pool.len(),
                    bar,
                    stats.nodes,
                    stats.leaves,
                );
            }
            if growing == 0 {
                pool.truncate(k);
                return pool;
            }
        }
    }
}

/// Traversal counters reported by the search trace.
#[derive(Default)]
struct SearchStats {
    nodes: u64,
    leaves: u64,
}

/// Excluded pairs as a sorted adjacency table: `row(q)` holds every partner
/// forbidden for `q`, so leaf scans check membership with a binary search
/// over a short slice instead of hashing.
struct ExclusionIndex {
    offsets: Vec<usize>,
    partners: Vec<PointId>,
}

impl ExclusionIndex {
    /// Builds from canonical `(min, max)` pairs with both endpoints in range.
    fn new(n: usize, excluded: &HashSet<(PointId, PointId)>) -> ExclusionIndex {
        let mut counts = vec![0usize; n + 1];
        for &(a, b) in excluded {
            counts[a as usize + 1] += 1;
            counts[b as usize + 1] += 1;
        }
        for v in 1..=n {
            counts[v] += counts[v - 1];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut partners = vec![0 as PointId; 2 * excluded.len()];
        for &(a, b) in excluded {
            partners[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            partners[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        for v in 0..n {
            partners[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        ExclusionIndex { offsets, partners }
    }

    fn row(&self, q: PointId) -> &[PointId] {
        &self.partners[self.offsets[q as usize]..self.offsets[q as usize + 1]]
    }
}

/// Keeps the m nearest neighbors one query has seen; the heap root is the
/// current worst, so an offer wins only when strictly smaller under the
/// (distance, index) order.
struct NearestSet {
    m: usize,
    heap: BinaryHeap<FarthestFirst>,
}

struct FarthestFirst {
    dist_sq: f64,
    id: PointId,
}

impl PartialEq for FarthestFirst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FarthestFirst {}
impl PartialOrd for FarthestFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FarthestFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.id.cmp(&other.id))
    }
}

impl NearestSet {
    fn new(m: usize) -> NearestSet {
        NearestSet {
            m,
            heap: BinaryHeap::with_capacity(m + 1),
        }
    }

    fn full(&self) -> bool {
        self.heap.len() == self.m
    }

    /// Squared distance of the current m-th nearest neighbor, or infinity
    /// while fewer than m are held.
    fn bar(&self) -> f64 {
        if self.full() {
            self.heap.peek().map_or(f64::INFINITY, |w| w.dist_sq)
        } else {
            f64::INFINITY
        }
    }

    fn offer(&mut self, dist_sq: f64, id: PointId) {
        let entry = FarthestFirst { dist_sq, id };
        if self.heap.len() < self.m {
            self.heap.push(entry);
        } else if let Some(worst) = self.heap.peek() {
            if entry.cmp(worst) == Ordering::Less {
                self.heap.pop();
                self.heap.push(entry);
            }
        }
    }

    fn into_sorted(self) -> Vec<(f64, PointId)> {
        let mut list: Vec<(f64, PointId)> =
            self.heap.into_iter().map(|w| (w.dist_sq, w.id)).collect();
        list.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        list
    }
}
