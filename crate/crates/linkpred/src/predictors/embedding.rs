//! Predictors that rank pairs by proximity in the resistance embedding.
//!
//! `spec_euclid` scores a pair by negated squared embedding distance, so
//! its top-k is exactly the k closest non-adjacent pairs and comes straight
//! out of the closest-pair search. `spec_cosine` first scales rows to unit
//! length; on unit vectors `|g(x) - g(y)|^2 = 2 - 2 cos(theta)`, so cosine
//! order is the reverse of distance order and the same search applies, with
//! the score reported as `1 - dist^2 / 2`. A row that is exactly zero has
//! no direction; by convention its pairs score 0, which slots them between
//! the positive-cosine and negative-cosine pairs.

use std::collections::HashSet;

use super::{validate_k, LinkPredictor, PredictorParams, ScoredPair};
use crate::closepairs::{k_closest_pairs_excluding, PointId};
use crate::graph::Graph;
use crate::spectral::{
    normalize_embedding, resistance_embedding, smallest_nonzero_eigenpairs, EigenOptions,
    SpectralEmbedding,
};
use crate::Result;

/// Solves for the `dim` smallest nonzero Laplacian eigenpairs of a
/// connected graph and assembles the resistance embedding.
pub fn embed(graph: &Graph, dim: usize, options: &EigenOptions) -> Result<SpectralEmbedding> {
    let lap = graph.laplacian();
    let pairs = smallest_nonzero_eigenpairs(&lap, dim, options)?;
    resistance_embedding(&pairs)
}

/// Top-k pairs by negated squared embedding distance, skipping `excluded`
/// (normally the training edges). Ascending distance with lexicographic
/// ties is exactly descending score with lexicographic ties, so the search
/// result maps one-to-one.
pub fn euclidean_rank(
    emb: &SpectralEmbedding,
    excluded: &HashSet<(PointId, PointId)>,
    k: usize,
) -> Result<Vec<ScoredPair>> {
    let close = k_closest_pairs_excluding(&emb.point_set(), k, excluded)?;
    Ok(close
        .into_iter()
        .map(|c| ScoredPair {
            x: c.i,
            y: c.j,
            score: -c.dist_sq,
        })
        .collect())
}

/// Top-k pairs by cosine similarity of embedding rows, skipping `excluded`.
///
/// Nonzero rows are normalized and searched for closest pairs; zero rows
/// (tracked separately) pair up with everything at score 0. The candidate
/// sets are merged under the standard ranking. Zero rows are a degenerate
/// corner: they cannot occur for an embedding of a connected graph unless
/// coordinates underflow to exact zeros.
pub fn cosine_rank(
    emb: &SpectralEmbedding,
    excluded: &HashSet<(PointId, PointId)>,
    k: usize,
) -> Result<Vec<ScoredPair>> {
    let (unit, zero_rows) = normalize_embedding(emb);
    if zero_rows.is_empty() {
        let close = k_closest_pairs_excluding(&unit.point_set(), k, excluded)?;
        return Ok(close.into_iter().map(cosine_pair).collect());
    }

    let n = unit.vertex_count();
    let is_zero: HashSet<PointId> = zero_rows.iter().copied().collect();
    // Search only the nonzero rows; original ids are recovered through the
    // position map afterwards.
    let nonzero: Vec<PointId> = (0..n as PointId).filter(|v| !is_zero.contains(v)).collect();
    let position: std::collections::HashMap<PointId, PointId> = nonzero
        .iter()
        .enumerate()
        .map(|(pos, &v)| (v, pos as PointId))
        .collect();
    let mut coords = Vec::with_capacity(nonzero.len() * unit.dim());
    for &v in &nonzero {
        coords.extend_from_slice(unit.row(v));
    }
    let sub = crate::closepairs::PointSet::new(unit.dim(), coords)?;
    let sub_excluded: HashSet<(PointId, PointId)> = excluded
        .iter()
        .filter_map(|&(a, b)| match (position.get(&a), position.get(&b)) {
            (Some(&pa), Some(&pb)) => Some((pa, pb)),
            _ => None,
        })
        .collect();
    let mut candidates: Vec<ScoredPair> = if nonzero.len() >= 2 {
        k_closest_pairs_excluding(&sub, k, &sub_excluded)?
            .into_iter()
            .map(|c| {
                let pair = cosine_pair(c);
                ScoredPair::new(nonzero[pair.x as usize], nonzero[pair.y as usize], pair.score)
            })
            .collect()
    } else {
        Vec::new()
    };
    // Every pair touching a zero row scores 0 by convention.
    let canonical_excluded: HashSet<(PointId, PointId)> = excluded
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    for &z in &zero_rows {
        for other in 0..n as PointId {
            if other == z || (is_zero.contains(&other) && other < z) {
                continue;
            }
            let pair = (z.min(other), z.max(other));
            if !canonical_excluded.contains(&pair) {
                candidates.push(ScoredPair {
                    x: pair.0,
                    y: pair.1,
                    score: 0.0,
                });
            }
        }
    }
    candidates.sort_by(super::rank_cmp);
    candidates.truncate(k);
    Ok(candidates)
}

fn cosine_pair(c: crate::closepairs::ClosePair) -> ScoredPair {
    ScoredPair {
        x: c.i,
        y: c.j,
        score: 1.0 - 0.5 * c.dist_sq,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScoreKind {
    Euclid,
    Cosine,
}

/// Spectral embedding predictor in either scoring flavor.
pub(super) struct Spectral {
    kind: ScoreKind,
    dim: usize,
    eigen: EigenOptions,
    allow_large_k: bool,
}

impl Spectral {
    pub(super) fn euclid(params: &PredictorParams) -> Spectral {
        Spectral {
            kind: ScoreKind::Euclid,
            dim: params.dim,
            eigen: params.eigen.clone(),
            allow_large_k: params.allow_large_k,
        }
    }

    pub(super) fn cosine(params: &PredictorParams) -> Spectral {
        Spectral {
            kind: ScoreKind::Cosine,
            dim: params.dim,
            eigen: params.eigen.clone(),
            allow_large_k: params.allow_large_k,
        }
    }
}

impl LinkPredictor for Spectral {
    fn name(&self) -> String {
        match self.kind {
            ScoreKind::Euclid => format!("spec_euclid{}", self.dim),
            ScoreKind::Cosine => format!("spec_cosine{}", self.dim),
        }
    }

    fn predict(&self, graph: &Graph, k: usize) -> Result<Vec<ScoredPair>> {
        validate_k(graph, k, self.allow_large_k)?;
        let emb = embed(graph, self.dim, &self.eigen)?;
        let excluded: HashSet<(PointId, PointId)> = graph.edges().collect();
        match self.kind {
            ScoreKind::Euclid => euclidean_rank(&emb, &excluded, k),
            ScoreKind::Cosine => cosine_rank(&emb, &excluded, k),
        }
    }
}
