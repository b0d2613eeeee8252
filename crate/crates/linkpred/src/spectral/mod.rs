//! Laplacian eigenpairs and the resistance embedding built from them.
//!
//! For a connected graph the combinatorial Laplacian has eigenvalues
//! `0 = lambda_1 < lambda_2 <= ... <= lambda_n`. The solver returns the `d`
//! smallest nonzero eigenpairs; scaling eigenvector coordinates by
//! `1 / sqrt(lambda)` yields an embedding whose squared Euclidean distances
//! approximate effective resistances between vertices (exactly, at
//! `d = n - 1`). A row-normalized variant supports cosine scoring: for unit
//! vectors, squared distance and cosine are interchangeable through
//! `|g(x) - g(y)|^2 = 2 - 2 cos(theta)`.

mod solver;

pub mod io;

use crate::closepairs::PointSet;
use crate::graph::{LaplacianView, VertexId};
use crate::{Error, Result};

pub use solver::{smallest_nonzero_eigenpairs, EigenOptions};

/// Ascending eigenvalues with matching eigenvectors.
///
/// Contract for a block returned by the solver with tolerance `tol`:
/// residuals `|L v - lambda v|` are at most `tol * max(1, lambda)`, the
/// vectors are orthonormal within `1e-8`, and each vector is orthogonal to
/// the all-ones nullvector within `1e-8 * sqrt(n)`. [`EigenPairs::check`]
/// verifies all of it.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Eigenvalues, ascending, all positive.
    pub values: Vec<f64>,
    /// `vectors[t]` is the unit eigenvector for `values[t]`, length `n`.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenPairs {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn order(&self) -> usize {
        self.vectors.first().map(|v| v.len()).unwrap_or(0)
    }

    /// Verifies the eigenpair contract against the Laplacian it came from.
    /// Returns a description of the first violated condition.
    pub fn check(&self, lap: &LaplacianView<'_>, tol: f64) -> std::result::Result<(), String> {
        let n = lap.order();
        if self.vectors.len() != self.values.len() {
            return Err("value and vector counts differ".into());
        }
        if self.vectors.iter().any(|v| v.len() != n) {
            return Err(format!("vector length differs from graph order {n}"));
        }
        if self.values.windows(2).any(|w| w[0] > w[1]) {
            return Err("eigenvalues are not ascending".into());
        }
        if let Some(v) = self.values.iter().find(|&&v| !(v > 0.0)) {
            return Err(format!("eigenvalue {v} is not positive"));
        }
        let mut scratch = vec![0.0; n];
        for (t, (v, &lambda)) in self.vectors.iter().zip(&self.values).enumerate() {
            lap.matvec(v, &mut scratch);
            let residual: f64 = scratch
                .iter()
                .zip(v)
                .map(|(lv, vi)| {
                    let r = lv - lambda * vi;
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            let allowed = tol * lambda.max(1.0);
            if residual > allowed {
                return Err(format!(
                    "residual {residual:.3e} of pair {t} exceeds {allowed:.3e}"
                ));
            }
            let mean_dot: f64 = v.iter().sum();
            if mean_dot.abs() > 1e-8 * (n as f64).sqrt() {
                return Err(format!(
                    "vector {t} is not orthogonal to the all-ones vector: |v.1| = {:.3e}",
                    mean_dot.abs()
                ));
            }
        }
        for i in 0..self.vectors.len() {
            for j in i..self.vectors.len() {
                let dot: f64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-8 {
                    return Err(format!(
                        "vectors {i} and {j} are not orthonormal: dot = {dot:.12}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Vertex coordinates in `R^dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    dim: usize,
    /// Eigenvalues the coordinates were scaled by; empty after normalization.
    eigenvalues: Vec<f64>,
    coords: Vec<f64>,
}

impl SpectralEmbedding {
    pub fn new(dim: usize, eigenvalues: Vec<f64>, coords: Vec<f64>) -> Result<SpectralEmbedding> {
        if dim == 0 {
            return Err(Error::input("embedding dimension must be positive"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::input(format!(
                "coordinate buffer length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if !eigenvalues.is_empty() && eigenvalues.len() != dim {
            return Err(Error::input(format!(
                "expected {dim} eigenvalues, found {}",
                eigenvalues.len()
            )));
        }
        Ok(SpectralEmbedding {
            dim,
            eigenvalues,
            coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn row(&self, x: VertexId) -> &[f64] {
        &self.coords[x as usize * self.dim..(x as usize + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Copies the coordinates into a point set for pair search.
    pub fn point_set(&self) -> PointSet {
        PointSet::new(self.dim, self.coords.clone()).expect("embedding coordinates are finite")
    }
}

/// Scales eigenvector coordinates by `1 / sqrt(lambda)`:
/// `f(x)[t] = v_t(x) / sqrt(lambda_t)`. Squared distances in this embedding
/// approximate effective resistances, and the approximation is exact when
/// all `n - 1` nonzero eigenpairs are used.
pub fn resistance_embedding(pairs: &EigenPairs) -> Result<SpectralEmbedding> {
    let d = pairs.count();
    if d == 0 {
        return Err(Error::input("embedding needs at least one eigenpair"));
    }
    let n = pairs.order();
    let scale: Vec<f64> = pairs.values.iter().map(|&l| 1.0 / l.sqrt()).collect();
    if scale.iter().any(|s| !s.is_finite()) {
        return Err(Error::input("eigenvalues must be positive and finite"));
    }
    let mut coords = vec![0.0; n * d];
    for (t, v) in pairs.vectors.iter().enumerate() {
        for (x, &vx) in v.iter().enumerate() {
            coords[x * d + t] = vx * scale[t];
        }
    }
    SpectralEmbedding::new(d, pairs.values.clone(), coords)
}

/// Scales every nonzero row to unit Euclidean norm. Rows that are exactly
/// zero stay zero and their vertex ids are returned so callers can rank such
/// vertices by the convention that their cosine score is 0.
pub fn normalize_embedding(emb: &SpectralEmbedding) -> (SpectralEmbedding, Vec<VertexId>) {
    let d = emb.dim();
    let mut coords = emb.coords.clone();
    let mut zero_rows = Vec::new();
    for x in 0..emb.vertex_count() {
        let row = &mut coords[x * d..(x + 1) * d];
        let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            zero_rows.push(x as VertexId);
        } else {
            for c in row {
                *c /= norm;
            }
        }
    }
    (
        SpectralEmbedding {
            dim: d,
            eigenvalues: Vec::new(),
            coords,
        },
        zero_rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn resistance_embedding_scales_columns() {
        let pairs = EigenPairs {
            values: vec![4.0, 9.0],
            vectors: vec![vec![1.0, -1.0, 0.0], vec![0.5, 0.5, -1.0]],
        };
        let emb = resistance_embedding(&pairs).unwrap();
        assert_eq!(emb.dim(), 2);
        assert_eq!(emb.vertex_count(), 3);
        assert_eq!(emb.row(0), &[1.0 / 2.0, 0.5 / 3.0]);
        assert_eq!(emb.row(2), &[0.0, -1.0 / 3.0]);
    }

    #[test]
    fn normalize_handles_zero_rows() {
        let emb = SpectralEmbedding::new(2, vec![], vec![3.0, 4.0, 0.0, 0.0, -5.0, 12.0]).unwrap();
        let (unit, zeros) = normalize_embedding(&emb);
        assert_eq!(zeros, vec![1]);
        assert_eq!(unit.row(0), &[0.6, 0.8]);
        assert_eq!(unit.row(1), &[0.0, 0.0]);
        let norm2: f64 = unit.row(2).iter().map(|c| c * c).sum();
        assert!((norm2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn check_rejects_broken_contract() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let lap = g.laplacian();
        // Triangle Laplacian has eigenvalues {0, 3, 3}; a correct pair:
        let s = 1.0 / 2f64.sqrt();
        let good = EigenPairs {
            values: vec![3.0],
            vectors: vec![vec![s, -s, 0.0]],
        };
        assert!(good.check(&lap, 1e-8).is_ok());

        let wrong_value = EigenPairs {
            values: vec![2.5],
            vectors: vec![vec![s, -s, 0.0]],
        };
        assert!(wrong_value.check(&lap, 1e-8).is_err());

        let not_unit = EigenPairs {
            values: vec![3.0],
            vectors: vec![vec![1.0, -1.0, 0.0]],
        };
        assert!(not_unit.check(&lap, 1e-8).is_err());

        let not_mean_free = EigenPairs {
            values: vec![3.0],
            vectors: vec![vec![1.0, 0.0, 0.0]],
        };
        assert!(not_mean_free.check(&lap, 1e-8).is_err());
    }
}
