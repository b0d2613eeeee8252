//! Link prediction for large sparse networks.
//!
//! The crate covers the full experimental loop: ingest a raw edge list into a
//! train/test instance ([`dataset`]), score candidate vertex pairs with any of
//! a family of predictors ([`predictors`]), and measure how many of the top-k
//! predicted pairs appear in the held-out test links ([`eval`]).
//!
//! Predictors fall into three groups:
//!
//! * local similarity indices (common neighbors, Jaccard, Adamic-Adar,
//!   resource allocation, preferential attachment) that only look at
//!   one- and two-hop neighborhoods,
//! * dense graph kernels (Katz, rooted PageRank, effective resistance,
//!   shortest path) that materialize an n-by-n score matrix and are guarded
//!   by a configurable size limit,
//! * spectral predictors that embed vertices into R^d using the smallest
//!   nonzero Laplacian eigenpairs ([`spectral`]) and rank non-adjacent pairs
//!   by embedding distance or cosine similarity via an exact k-closest-pair
//!   search ([`closepairs`]).
//!
//! Every predictor implements [`predictors::LinkPredictor`] and is registered
//! by name in [`predictors::Registry`], so callers select algorithms at
//! runtime from configuration. All algorithms are deterministic: iterative
//! solvers start from seeded generators and every ranking breaks score ties
//! by lexicographic vertex order.

pub mod closepairs;
pub mod dataset;
pub mod eval;
pub mod graph;
pub mod predictors;
pub mod spectral;
pub mod synth;

mod error;

pub use error::{Error, Result};
