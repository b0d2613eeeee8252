//! Solver for the smallest nonzero Laplacian eigenpairs.
//!
//! Small graphs go through a dense symmetric eigendecomposition. Everything
//! else runs locally optimal block preconditioned iteration: keep an
//! orthonormal block of `d + extra` Ritz vectors orthogonal to the all-ones
//! nullvector, then each round perform Rayleigh-Ritz over the span of the
//! block, the Jacobi-preconditioned residuals, and the previous step
//! directions. The three-term space builds the same kind of polynomial
//! acceleration conjugate gradients gets, which is what cuts through the
//! tightly clustered bottom spectra of large sparse graphs; plain inverse
//! iteration stalls there because the ratio between neighboring eigenvalues
//! is nearly one.
//!
//! Determinism: the starting block comes from a counter-based generator
//! seeded from the options, and every reduction is an ordered sequential
//! sum, so identical inputs produce identical output bits.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EigenPairs;
use crate::graph::LaplacianView;
use crate::{Error, Result};

/// Tuning knobs for [`smallest_nonzero_eigenpairs`].
#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Residual tolerance: a pair is converged when
    /// `|L v - lambda v| <= tol * max(1, lambda)`.
    pub tol: f64,
    /// Outer (Rayleigh-Ritz) iteration cap.
    pub max_outer: usize,
    /// Graphs with at most this many vertices use the dense path.
    pub dense_cutoff: usize,
    /// Seed for the starting block.
    pub seed: u64,
    /// Extra block columns beyond `d`; `None` picks `max(4, d)`. Extra
    /// columns buy separation from the unwanted part of the spectrum, which
    /// is what drives the convergence rate.
    pub block_extra: Option<usize>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_outer: 10_000,
            dense_cutoff: 256,
            seed: 0x5EED,
            block_extra: None,
        }
    }
}

/// Computes the `d` smallest nonzero eigenpairs of the Laplacian of a
/// connected graph, satisfying the [`EigenPairs`] contract at
/// `options.tol`.
pub fn smallest_nonzero_eigenpairs(
    lap: &LaplacianView<'_>,
    d: usize,
    options: &EigenOptions,
) -> Result<EigenPairs> {
    let n = lap.order();
    if !lap.graph().is_connected() {
        return Err(Error::Disconnected {
            operation: "eigensolver",
        });
    }
    if d == 0 || d + 1 > n {
        return Err(Error::config(format!(
            "embedding dimension must satisfy 1 <= d <= n - 1 (d = {d}, n = {n})"
        )));
    }
    let pairs = if n <= options.dense_cutoff {
        dense_path(lap, d, options.tol)?
    } else {
        iterative_path(lap, d, options)?
    };
    #[cfg(debug_assertions)]
    if let Err(problem) = pairs.check(lap, options.tol) {
        panic!("eigensolver violated its own contract: {problem}");
    }
    Ok(pairs)
}

fn dense_path(lap: &LaplacianView<'_>, d: usize, tol: f64) -> Result<EigenPairs> {
    let dense = lap.to_dense();
    let (_, basis) = sym_eigen_consistent(&dense, jacobi_target(tol));
    // Column 0 spans the nullspace of the connected Laplacian; the d
    // requested pairs follow it.
    let mut vectors: Vec<Vec<f64>> = (1..=d)
        .map(|c| basis.column(c).iter().copied().collect())
        .collect();
    // The rotations leave eps-level drift; scrub the nullspace component and
    // restore orthonormality explicitly so the contract holds exactly.
    for v in &mut vectors {
        project_mean_zero(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    orthonormalize(&mut vectors, &mut rng);
    let values: Vec<f64> = vectors
        .iter()
        .map(|v| {
            let dv = nalgebra::DVector::from_column_slice(v);
            (&dense * &dv).dot(&dv)
        })
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(EigenPairs {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
    })
}

/// Off-diagonal Frobenius target for the Jacobi polish: comfortably inside
/// the residual tolerance, floored near the rounding noise of the rotations.
fn jacobi_target(tol: f64) -> f64 {
    (0.05 * tol).max(1e-13)
}

/// Full symmetric eigendecomposition with the pairing of values and vectors
/// guaranteed consistent: returns `(values, basis)` with `values` ascending,
/// `basis` columns orthonormal, and `mat * basis.column(i)` close to
/// `values[i] * basis.column(i)`.
///
/// The QR factorization underneath returns an excellent orthonormal basis
/// but can report eigenvalues misaligned with their vectors on clustered
/// spectra, so its eigenvalues are discarded: the basis projects `mat` to a
/// near-diagonal matrix, and cyclic Jacobi rotations finish the
/// diagonalization with values read off the diagonal they belong to.
fn sym_eigen_consistent(mat: &DMatrix<f64>, target_off: f64) -> (Vec<f64>, DMatrix<f64>) {
    let n = mat.nrows();
    let mut q = mat.clone().symmetric_eigen().eigenvectors;
    let mut m = q.transpose() * (mat * &q);
    jacobi_diagonalize(&mut m, &mut q, target_off);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[(a, a)].total_cmp(&m[(b, b)]));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let basis = DMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
    (values, basis)
}

/// Drives `m` to diagonal form by cyclic Jacobi sweeps, accumulating the
/// rotations into `q`, until the off-diagonal Frobenius norm drops below
/// `target_off` or the sweep budget runs out. Quadratic convergence from a
/// near-diagonal start makes one or two sweeps the common case.
fn jacobi_diagonalize(m: &mut DMatrix<f64>, q: &mut DMatrix<f64>, target_off: f64) {
    let n = m.nrows();
    for _sweep in 0..30 {
        let off_sq: f64 = (0..n)
            .map(|i| ((i + 1)..n).map(|j| m[(i, j)] * m[(i, j)]).sum::<f64>())
            .sum();
        if (2.0 * off_sq).sqrt() <= target_off {
            return;
        }
        for p in 0..n.saturating_sub(1) {
            for r in (p + 1)..n {
                let mpr = m[(p, r)];
                let scale = m[(p, p)].abs() + m[(r, r)].abs();
                if mpr.abs() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
                    continue;
                }
                // Rotation angle that annihilates the (p, r) entry; the
                // smaller root keeps the rotation close to the identity.
                let theta = (m[(r, r)] - m[(p, p)]) / (2.0 * mpr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
}

fn iterative_path(lap: &LaplacianView<'_>, d: usize, options: &EigenOptions) -> Result<EigenPairs> {
    let n = lap.order();
    let extra = options.block_extra.unwrap_or_else(|| d.max(4));
    let s = (d + extra).min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let inv_diag: Vec<f64> = (0..n).map(|v| 1.0 / lap.degree(v as u32) as f64).collect();
    let trace = std::env::var_os("LINKPRED_SOLVER_TRACE").is_some();

    // Ritz block X starts random, mean-free, orthonormal; P holds the
    // previous step directions and starts empty.
    let mut x: Vec<Vec<f64>> = (0..s)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    for col in &mut x {
        project_mean_zero(col);
    }
    orthonormalize(&mut x, &mut rng);
    let mut p: Vec<Vec<f64>> = Vec::new();

    let mut worst_tracked = f64::INFINITY;

    for outer in 1..=options.max_outer {
        // Rayleigh-Ritz on the block with fresh products: H = X^T L X,
        // rotate X by H's eigenbasis so columns become Ritz vectors with
        // ascending values.
        orthonormalize(&mut x, &mut rng);
        let ly: Vec<Vec<f64>> = x
            .iter()
            .map(|c| {
                let mut out = vec![0.0; n];
                lap.matvec(c, &mut out);
                out
            })
            .collect();
        let mut h = DMatrix::zeros(s, s);
        for i in 0..s {
            for j in i..s {
                let v = dot(&x[i], &ly[j]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let (theta, rot) = sym_eigen_consistent(&h, jacobi_target(options.tol));
        let x_ritz = combine_all(&x, &rot, 0, s);
        let lx = combine_all(&ly, &rot, 0, s);
        x = x_ritz;

        let residuals: Vec<f64> = (0..s)
            .map(|i| {
                lx[i]
                    .iter()
                    .zip(&x[i])
                    .map(|(l, v)| {
                        let r = l - theta[i] * v;
                        r * r
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let converged: Vec<bool> = (0..s)
            .map(|i| residuals[i] <= options.tol * theta[i].max(1.0))
            .collect();
        worst_tracked = residuals[..d].iter().cloned().fold(0.0, f64::max);
        if trace {
            let worst_rel = residuals[..d]
                .iter()
                .zip(&theta[..d])
                .map(|(r, t)| r / t.max(1.0))
                .fold(0.0f64, f64::max);
            let conv = converged[..d].iter().filter(|&&c| c).count();
            eprintln!(
                "outer {outer}: worst rel {worst_rel:.3e}, conv {conv}/{d}, \
                 theta [{:.6e}, {:.6e}], basis {}",
                theta[0],
                theta[s - 1],
                s + p.len(),
            );
        }

        if converged[..d].iter().all(|&c| c) {
            let mut vectors = x[..d].to_vec();
            for v in &mut vectors {
                project_mean_zero(v);
            }
            let pairs = EigenPairs {
                values: theta[..d].to_vec(),
                vectors,
            };
            // The Ritz data already passed the residual test; re-checking
            // the full contract here guards the orthogonality bounds, and a
            // failure simply means more iterations.
            if pairs.check(lap, options.tol).is_ok() {
                return Ok(pairs);
            }
        }

        // Extend the space: Jacobi-preconditioned residuals of unconverged
        // columns, then the previous directions, each kept only when it
        // still has a component outside the span built so far.
        let mut basis = x.clone();
        for i in 0..s {
            if converged[i] {
                continue;
            }
            let mut w: Vec<f64> = (0..n)
                .map(|k| (lx[i][k] - theta[i] * x[i][k]) * inv_diag[k])
                .collect();
            project_mean_zero(&mut w);
            push_orthonormal(&mut basis, w);
        }
        for dir in p.drain(..) {
            push_orthonormal(&mut basis, dir);
        }
        if basis.len() == s {
            // Everything new collapsed into the current span: restart the
            // stalled directions from fresh randomness.
            let mut fresh: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project_mean_zero(&mut fresh);
            push_orthonormal(&mut basis, fresh);
        }
        let k = basis.len();

        // Rayleigh-Ritz over the extended space. The first s products are
        // the rotated ones from above; the appended columns need fresh
        // multiplications.
        let mut lbasis = lx;
        for col in &basis[s..] {
            let mut out = vec![0.0; n];
            lap.matvec(col, &mut out);
            lbasis.push(out);
        }
        let mut hs = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = dot(&basis[i], &lbasis[j]);
                hs[(i, j)] = v;
                hs[(j, i)] = v;
            }
        }
        let (_, c) = sym_eigen_consistent(&hs, jacobi_target(options.tol));

        // The s best Ritz directions of the extended space become the next
        // block; their components outside the old block become the next
        // step directions.
        x = combine_all(&basis, &c, 0, s);
        for col in &mut x {
            project_mean_zero(col);
        }
        p = combine_all(&basis[s..], &c.rows(s, k - s).clone_owned(), 0, s)
            .into_iter()
            .filter(|col| norm(col) > 1e-12)
            .collect();
    }
    Err(Error::NoConvergence {
        iterations: options.max_outer,
        residual: worst_tracked,
        tol: options.tol,
    })
}

/// Linear combinations of `cols` by the coefficient columns
/// `first..first + count` of `coeffs`, one output column each.
fn combine_all(
    cols: &[Vec<f64>],
    coeffs: &DMatrix<f64>,
    first: usize,
    count: usize,
) -> Vec<Vec<f64>> {
    let n = cols.first().map_or(0, Vec::len);
    (first..first + count)
        .map(|c| {
            let mut out = vec![0.0; n];
            for (i, col) in cols.iter().enumerate() {
                axpy(coeffs[(i, c)], col, &mut out);
            }
            out
        })
        .collect()
}

/// Projects `col` against the columns already in `basis` (two passes) and
/// appends it normalized when a meaningful component of its own survives;
/// a column that collapses into the span is dropped.
fn push_orthonormal(basis: &mut Vec<Vec<f64>>, mut col: Vec<f64>) {
    let before = norm(&col);
    if !(before > 0.0) {
        return;
    }
    for _pass in 0..2 {
        for prev in basis.iter() {
            let r = dot(prev, &col);
            axpy(-r, prev, &mut col);
        }
    }
    let after = norm(&col);
    if after > 1e-10 * before {
        for v in col.iter_mut() {
            *v /= after;
        }
        basis.push(col);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

/// Subtracts the mean, leaving the vector orthogonal to all-ones.
fn project_mean_zero(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// In-place modified Gram-Schmidt with a second pass for stability. A column
/// that collapses to numerical zero is replaced by a fresh random mean-free
/// direction and reorthogonalized.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for i in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let (before, rest) = cols.split_at_mut(i);
            let col = &mut rest[0];
            for _pass in 0..2 {
                for prev in before.iter() {
                    let r = dot(prev, col);
                    axpy(-r, prev, col);
                }
            }
            let nrm = norm(col);
            if nrm > 1e-12 {
                for v in col.iter_mut() {
                    *v /= nrm;
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 32, "orthonormalization cannot recover rank");
            for v in col.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            project_mean_zero(col);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::synth;

    fn path_graph(n: usize) -> Graph {
        let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|v| (v, v + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn complete_graph(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    fn iterative_options() -> EigenOptions {
        EigenOptions {
            dense_cutoff: 0,
            ..EigenOptions::default()
        }
    }

    #[test]
    fn rejects_bad_dimension_and_disconnected_graphs() {
        let g = path_graph(5);
        let lap = g.laplacian();
        assert!(matches!(
            smallest_nonzero_eigenpairs(&lap, 0, &EigenOptions::default()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            smallest_nonzero_eigenpairs(&lap, 5, &EigenOptions::default()),
            Err(Error::Config(_))
        ));
        let split = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            smallest_nonzero_eigenpairs(&split.laplacian(), 1, &EigenOptions::default()),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn path_graph_eigenvalues_match_closed_form() {
        // Path Laplacian eigenvalues are 4 sin^2(k pi / 2n).
        let n = 12;
        let g = path_graph(n);
        let lap = g.laplacian();
        for opts in [EigenOptions::default(), iterative_options()] {
            let pairs = smallest_nonzero_eigenpairs(&lap, 3, &opts).unwrap();
            for (k, &value) in pairs.values.iter().enumerate() {
                let exact =
                    4.0 * (std::f64::consts::PI * (k + 1) as f64 / (2.0 * n as f64)).sin().powi(2);
                assert!(
                    (value - exact).abs() <= 1e-8 * exact,
                    "pair {k}: {value} vs {exact}"
                );
            }
            pairs.check(&lap, opts.tol).unwrap();
        }
    }

    #[test]
    fn complete_graph_has_degenerate_spectrum() {
        // K_n: every nonzero eigenvalue equals n.
        let g = complete_graph(9);
        let lap = g.laplacian();
        for opts in [EigenOptions::default(), iterative_options()] {
            let pairs = smallest_nonzero_eigenpairs(&lap, 4, &opts).unwrap();
            for &v in &pairs.values {
                assert!((v - 9.0).abs() < 1e-7);
            }
            pairs.check(&lap, opts.tol).unwrap();
        }
    }

    #[test]
    fn star_graph_spectrum() {
        // Star on n vertices: eigenvalues {0, 1 (n-2 times), n}.
        let n = 8;
        let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (0, v)).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let pairs =
            smallest_nonzero_eigenpairs(&g.laplacian(), n - 1, &iterative_options()).unwrap();
        for &v in &pairs.values[..n - 2] {
            assert!((v - 1.0).abs() < 1e-7);
        }
        assert!((pairs.values[n - 2] - n as f64).abs() < 1e-7);
    }

    #[test]
    fn iterative_matches_dense_on_random_graphs() {
        for seed in 0..8 {
            let g = synth::random_connected(40 + seed as usize * 13, 60, seed);
            let lap = g.laplacian();
            let dense = smallest_nonzero_eigenpairs(&lap, 5, &EigenOptions::default()).unwrap();
            let iter = smallest_nonzero_eigenpairs(&lap, 5, &iterative_options()).unwrap();
            for (a, b) in dense.values.iter().zip(&iter.values) {
                assert!((a - b).abs() <= 1e-6 * a.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let g = synth::preferential_attachment(400, 3, 5);
        let lap = g.laplacian();
        let a = smallest_nonzero_eigenpairs(&lap, 4, &iterative_options()).unwrap();
        let b = smallest_nonzero_eigenpairs(&lap, 4, &iterative_options()).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn full_spectrum_on_small_graph() {
        // d = n - 1 exercises the block cap s = n - 1.
        let g = synth::random_connected(9, 10, 3);
        let lap = g.laplacian();
        let pairs = smallest_nonzero_eigenpairs(&lap, 8, &iterative_options()).unwrap();
        assert_eq!(pairs.count(), 8);
        pairs.check(&lap, 1e-8).unwrap();
        // Laplacian trace equals the degree sum; eigenvalues must add up.
        let trace: f64 = (0..9).map(|v| g.degree(v) as f64).sum();
        let sum: f64 = pairs.values.iter().sum();
        assert!((trace - sum).abs() < 1e-6);
    }
}
