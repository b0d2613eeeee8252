//! Link predictors behind one trait, selectable by name.
//!
//! A predictor scores non-adjacent vertex pairs of a training graph and
//! returns the top-k pairs. Scores of different predictors are not
//! comparable; only the ranking matters. Every predictor uses the same
//! ranking convention: higher score first, ties broken by lexicographic
//! pair order, pairs canonical with `x < y`. Results can run short of `k`
//! when a predictor's candidate set (say, pairs at distance two) has fewer
//! scorable pairs; callers decide whether a shortfall matters.
//!
//! [`Registry`] maps names like `common_neighbors`, `katz`, or
//! `spec_euclid16` (a trailing integer selects the embedding dimension) to
//! factories. Parameters that names do not encode come from
//! [`PredictorParams`].

mod embedding;
mod kernel;
mod local;

pub use embedding::{cosine_rank, embed, euclidean_rank};
pub use kernel::{
    katz_kernel, predict_from_kernel, resistance_kernel, rooted_pagerank_kernel,
    shortest_path_kernel, spectral_radius_estimate, GraphKernel,
};
pub use local::{neighborhood_score, LocalMetric};

use std::cmp::Ordering;

use crate::graph::{Graph, VertexId};
use crate::spectral::EigenOptions;
use crate::{Error, Result};

/// A canonical vertex pair (`x < y`) with its predicted score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub x: VertexId,
    pub y: VertexId,
    pub score: f64,
}

impl ScoredPair {
    /// Canonicalizes the endpoint order.
    pub fn new(a: VertexId, b: VertexId, score: f64) -> ScoredPair {
        ScoredPair {
            x: a.min(b),
            y: a.max(b),
            score,
        }
    }
}

/// Ranking order: descending score, then ascending `(x, y)`. This is a
/// strict total order on distinct pairs, so every top-k result is unique.
pub fn rank_cmp(a: &ScoredPair, b: &ScoredPair) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.x.cmp(&b.x))
        .then(a.y.cmp(&b.y))
}

/// Predicts missing links of a training graph.
pub trait LinkPredictor {
    /// Name used in reports and output files, including any encoded
    /// parameters (for example `spec_euclid8`).
    fn name(&self) -> String;

    /// The top `k` non-adjacent pairs under this predictor's score,
    /// sorted by [`rank_cmp`]. May return fewer than `k` pairs when the
    /// candidate set runs out.
    fn predict(&self, graph: &Graph, k: usize) -> Result<Vec<ScoredPair>>;
}

/// Parameters a predictor may need beyond its name.
#[derive(Debug, Clone)]
pub struct PredictorParams {
    /// Embedding dimension for spectral predictors.
    pub dim: usize,
    /// Katz damping; must satisfy `beta * spectral_radius < 1`.
    pub beta: f64,
    /// Rooted PageRank restart probability, in `(0, 1)`.
    pub alpha: f64,
    /// Dense kernels refuse graphs with more vertices than this.
    pub dense_guard: usize,
    /// Eigensolver settings for spectral predictors.
    pub eigen: EigenOptions,
    /// Permits `k` beyond the edge count of the training graph. The usual
    /// experimental range is `1 <= k <= |E|` and it is enforced by default.
    pub allow_large_k: bool,
}

impl Default for PredictorParams {
    fn default() -> Self {
        PredictorParams {
            dim: 8,
            beta: 0.01,
            alpha: 0.15,
            dense_guard: 5000,
            eigen: EigenOptions::default(),
            allow_large_k: false,
        }
    }
}

/// Shared k validation: positive always, bounded by `|E|` unless the caller
/// opted out.
pub(crate) fn validate_k(graph: &Graph, k: usize, allow_large_k: bool) -> Result<()> {
    if k == 0 {
        return Err(Error::input("prediction count k must be at least 1"));
    }
    if !allow_large_k && k > graph.edge_count() {
        return Err(Error::input(format!(
            "k = {k} exceeds the training edge count {}; stay within 1 <= k <= |E| \
             or allow large k explicitly",
            graph.edge_count()
        )));
    }
    Ok(())
}

/// Bounded selection of the k best pairs under [`rank_cmp`]. The heap keeps
/// the current worst on top, so an offer either replaces it or is dropped;
/// insertion order never changes the outcome because the order is total.
pub(crate) struct TopScores {
    k: usize,
    heap: std::collections::BinaryHeap<RankedWorst>,
}

struct RankedWorst(ScoredPair);

impl PartialEq for RankedWorst {
    fn eq(&self, other: &Self) -> bool {
        rank_cmp(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for RankedWorst {}
impl PartialOrd for RankedWorst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RankedWorst {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_cmp(&self.0, &other.0)
    }
}

impl TopScores {
    pub fn new(k: usize) -> TopScores {
        TopScores {
            k,
            heap: std::collections::BinaryHeap::with_capacity(k + 1),
        }
    }

    pub fn full(&self) -> bool {
        self.heap.len() == self.k
    }

    /// Score of the current k-th pair; only meaningful when full.
    pub fn bar_score(&self) -> f64 {
        self.heap
            .peek()
            .map(|w| w.0.score)
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn offer(&mut self, pair: ScoredPair) {
        if self.heap.len() < self.k {
            self.heap.push(RankedWorst(pair));
        } else if let Some(worst) = self.heap.peek() {
            if rank_cmp(&pair, &worst.0) == Ordering::Less {
                self.heap.pop();
                self.heap.push(RankedWorst(pair));
            }
        }
    }

    pub fn into_sorted(self) -> Vec<ScoredPair> {
        let mut pairs: Vec<ScoredPair> = self.heap.into_iter().map(|w| w.0).collect();
        pairs.sort_unstable_by(rank_cmp);
        pairs
    }
}

/// Name-to-factory table of every built-in predictor.
pub struct Registry {
    entries: Vec<Entry>,
}

struct Entry {
    canonical: &'static str,
    aliases: &'static [&'static str],
    /// Spectral names accept a trailing dimension, e.g. `spec_euclid16`.
    dim_suffix: bool,
    factory: fn(&PredictorParams) -> Box<dyn LinkPredictor>,
}

impl Registry {
    /// Registry with all built-in predictors.
    pub fn with_defaults() -> Registry {
        Registry {
            entries: vec![
                Entry {
                    canonical: "common_neighbors",
                    aliases: &["commonneighbors", "cn"],
                    dim_suffix: false,
                    factory: |p| {
                        Box::new(local::Neighborhood::new(
                            local::LocalMetric::CommonNeighbors,
                            p,
                        ))
                    },
                },
                Entry {
                    canonical: "jaccard",
                    aliases: &[],
                    dim_suffix: false,
                    factory: |p| Box::new(local::Neighborhood::new(local::LocalMetric::Jaccard, p)),
                },
                Entry {
                    canonical: "adamic_adar",
                    aliases: &["adamicadar", "aa"],
                    dim_suffix: false,
                    factory: |p| {
                        Box::new(local::Neighborhood::new(local::LocalMetric::AdamicAdar, p))
                    },
                },
                Entry {
                    canonical: "resource_allocation",
                    aliases: &["resourceallocation", "ra"],
                    dim_suffix: false,
                    factory: |p| {
                        Box::new(local::Neighborhood::new(
                            local::LocalMetric::ResourceAllocation,
                            p,
                        ))
                    },
                },
                Entry {
                    canonical: "pref_attach",
                    aliases: &["preferentialattachment", "prefattach"],
                    dim_suffix: false,
                    factory: |p| Box::new(local::PreferentialAttachment::new(p)),
                },
                Entry {
                    canonical: "katz",
                    aliases: &[],
                    dim_suffix: false,
                    factory: |p| Box::new(kernel::KernelPredictor::katz(p)),
                },
                Entry {
                    canonical: "rooted_pagerank",
                    aliases: &["pagerank", "rootedpagerank", "rpr"],
                    dim_suffix: false,
                    factory: |p| Box::new(kernel::KernelPredictor::rooted_pagerank(p)),
                },
                Entry {
                    canonical: "resistance",
                    aliases: &["effectiveresistance", "commutetime"],
                    dim_suffix: false,
                    factory: |p| Box::new(kernel::KernelPredictor::resistance(p)),
                },
                Entry {
                    canonical: "shortest_path",
                    aliases: &["shortestpath", "graphdistance"],
                    dim_suffix: false,
                    factory: |p| Box::new(kernel::KernelPredictor::shortest_path(p)),
                },
                Entry {
                    canonical: "spec_euclid",
                    aliases: &["speceuclid", "spectral_euclid"],
                    dim_suffix: true,
                    factory: |p| Box::new(embedding::Spectral::euclid(p)),
                },
                Entry {
                    canonical: "spec_cosine",
                    aliases: &["speccosine", "spectral_cosine"],
                    dim_suffix: true,
                    factory: |p| Box::new(embedding::Spectral::cosine(p)),
                },
            ],
        }
    }

    /// Canonical names, alphabetical.
    pub fn names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = self.entries.iter().map(|e| e.canonical).collect();
        names.sort_unstable();
        names
    }

    /// Builds the predictor named by `spec`. Matching ignores case and
    /// underscores, so `commonNeighbors` and `common_neighbors` both work;
    /// spectral names accept a trailing dimension that overrides
    /// `params.dim`.
    pub fn create(
        &self,
        spec: &str,
        params: &PredictorParams,
    ) -> Result<Box<dyn LinkPredictor>> {
        let norm = normalize_name(spec);
        let (base, dim) = split_dim_suffix(&norm);
        for entry in &self.entries {
            let matches =
                |name: &str| normalize_name(name) == base || normalize_name(name) == norm;
            if matches(entry.canonical) || entry.aliases.iter().any(|a| matches(a)) {
                // A dim suffix on a non-spectral name is not a match.
                if normalize_name(entry.canonical) != norm
                    && !entry.aliases.iter().any(|a| normalize_name(a) == norm)
                    && !entry.dim_suffix
                {
                    continue;
                }
                let mut params = params.clone();
                if entry.dim_suffix {
                    if let Some(d) = dim {
                        params.dim = d;
                    }
                }
                return Ok((entry.factory)(&params));
            }
        }
        Err(Error::config(format!(
            "unknown predictor '{spec}'; available: {}",
            self.names().join(", ")
        )))
    }
}

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| *c != '_' && *c != '-')
        .flat_map(|c| c.to_lowercase())
        .collect()
}

/// Splits a trailing integer off a normalized name: `speceuclid16` becomes
/// `("speceuclid", Some(16))`.
fn split_dim_suffix(norm: &str) -> (&str, Option<usize>) {
    let digits = norm.len() - norm.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits == norm.len() {
        return (norm, None);
    }
    let (base, suffix) = norm.split_at(norm.len() - digits);
    (base, suffix.parse().ok())
}
