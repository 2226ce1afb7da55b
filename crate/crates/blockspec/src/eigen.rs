//! Symmetric eigensolver for the top-k eigenpairs by absolute eigenvalue.
//!
//! Two backends sit behind one interface: a dense full decomposition
//! (LAPACK) and a restarted Lanczos iteration with full reorthogonalization
//! and deflation against locked pairs. "Top k" always means largest
//! absolute eigenvalue, taking the extremes of both ends of the spectrum;
//! the normalized adjacency of dissociative models has its informative
//! eigenvalue near -1.

use ndarray::{Array1, Array2};
use ndarray_linalg::Eigh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Symmetric linear operator: everything the solver needs from a matrix.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn to_dense(&self) -> Array2<f64>;
}

impl SymOp for Array2<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        for i in 0..n {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
    }

    fn to_dense(&self) -> Array2<f64> {
        self.clone()
    }
}

/// Adjacency matrix of a graph as an implicit operator.
pub struct AdjacencyOp<'a> {
    g: &'a Graph,
}

impl<'a> AdjacencyOp<'a> {
    pub fn new(g: &'a Graph) -> Self {
        AdjacencyOp { g }
    }
}

impl SymOp for AdjacencyOp<'_> {
    fn dim(&self) -> usize {
        self.g.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.g.node_count() {
            let mut acc = 0.0;
            for &j in self.g.neighbors(i) {
                acc += x[j];
            }
            y[i] = acc;
        }
    }

    fn to_dense(&self) -> Array2<f64> {
        self.g.adjacency_dense()
    }
}

/// Degree-normalized adjacency `D^{-1/2} A D^{-1/2}` as an implicit
/// operator. Construction fails on zero-degree nodes; callers prune first.
pub struct NormalizedAdjacencyOp<'a> {
    g: &'a Graph,
    inv_sqrt_deg: Vec<f64>,
}

impl<'a> NormalizedAdjacencyOp<'a> {
    pub fn new(g: &'a Graph) -> Result<Self> {
        let mut inv = Vec::with_capacity(g.node_count());
        for (i, &d) in g.degrees().iter().enumerate() {
            if d == 0 {
                return Err(Error::ZeroDegree(i));
            }
            inv.push(1.0 / (d as f64).sqrt());
        }
        Ok(NormalizedAdjacencyOp {
            g,
            inv_sqrt_deg: inv,
        })
    }
}

impl SymOp for NormalizedAdjacencyOp<'_> {
    fn dim(&self) -> usize {
        self.g.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.g.node_count() {
            let mut acc = 0.0;
            for &j in self.g.neighbors(i) {
                acc += self.inv_sqrt_deg[j] * x[j];
            }
            y[i] = acc * self.inv_sqrt_deg[i];
        }
    }

    fn to_dense(&self) -> Array2<f64> {
        let n = self.g.node_count();
        let mut m = Array2::zeros((n, n));
        for &(a, b) in self.g.edges() {
            let v = self.inv_sqrt_deg[a] * self.inv_sqrt_deg[b];
            m[[a, b]] = v;
            m[[b, a]] = v;
        }
        m
    }
}

/// Dense normalized adjacency with entries `A_ij / sqrt(d_i d_j)`.
pub fn normalize_adjacency(g: &Graph) -> Result<Array2<f64>> {
    Ok(NormalizedAdjacencyOp::new(g)?.to_dense())
}

/// Top-k eigenpairs ordered by descending absolute eigenvalue (ties broken
/// by descending signed value). Columns of `vectors` are unit-norm and
/// mutually orthogonal; the entry of largest magnitude in each column is
/// positive (ties: lowest index).
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
    pub converged: Vec<bool>,
    pub residual_norms: Vec<f64>,
    /// Set when two eigenvalues near the selection boundary are closer than
    /// `1e-6` times the spectral spread; downstream comparisons should then
    /// work with subspaces, not individual vectors.
    pub near_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenBackend {
    /// Dense for small problems or large k, Lanczos otherwise.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub backend: EigenBackend,
    /// Seed for the deterministic Lanczos start vectors.
    pub seed: u64,
    /// Convergence: residual norm <= tol * max(1, |lambda|).
    pub tol: f64,
    pub max_restarts: usize,
    /// Krylov dimension per restart; 0 picks a budget from k and n.
    pub krylov_dim: usize,
    /// Auto backend switches to the dense path at or below this dimension.
    pub dense_threshold: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            backend: EigenBackend::Auto,
            seed: 0x5eed,
            tol: 1e-8,
            max_restarts: 64,
            krylov_dim: 0,
            dense_threshold: 800,
        }
    }
}

const DEGENERACY_REL_GAP: f64 = 1e-6;

/// Computes the top-k eigenpairs of a symmetric operator.
pub fn top_k_eigenpairs<O: SymOp + ?Sized>(op: &O, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("k = {k} out of range for dim {n}")));
    }
    let use_dense = match opts.backend {
        EigenBackend::Dense => true,
        EigenBackend::Lanczos => false,
        EigenBackend::Auto => n <= opts.dense_threshold || 4 * k >= n,
    };
    if use_dense {
        dense_top_k(op, k, opts)
    } else {
        lanczos_top_k(op, k, opts)
    }
}

/// Validates symmetry to 1e-12 before decomposing a caller-provided matrix.
pub fn top_k_eigenpairs_matrix(m: &Array2<f64>, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    if m.nrows() != m.ncols() {
        return Err(Error::Invalid(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[[i, j]] - m[[j, i]]).abs() > 1e-12 {
                return Err(Error::Invalid(format!(
                    "matrix not symmetric at ({i},{j}): {} vs {}",
                    m[[i, j]],
                    m[[j, i]]
                )));
            }
        }
    }
    top_k_eigenpairs(m, k, opts)
}

fn dense_top_k<O: SymOp + ?Sized>(op: &O, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = op.dim();
    let m = op.to_dense();
    let (vals, vecs) = m
        .eigh(ndarray_linalg::UPLO::Lower)
        .map_err(|e| Error::Eigen(format!("dense decomposition failed: {e}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        vals[j]
            .abs()
            .partial_cmp(&vals[i].abs())
            .unwrap()
            .then(vals[j].partial_cmp(&vals[i]).unwrap())
    });
    let spread = if n > 1 {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    } else {
        0.0
    };
    let mut near_degenerate = false;
    for i in 0..k {
        if i + 1 < n {
            let gap = (vals[order[i]].abs() - vals[order[i + 1]].abs()).abs();
            if gap < DEGENERACY_REL_GAP * spread.max(f64::MIN_POSITIVE) {
                near_degenerate = true;
            }
        }
    }
    let mut vectors = Array2::zeros((n, k));
    let mut values = Vec::with_capacity(k);
    for (c, &idx) in order[..k].iter().enumerate() {
        values.push(vals[idx]);
        let mut col = vecs.column(idx).to_owned();
        canonicalize_sign(col.as_slice_mut().unwrap());
        vectors.column_mut(c).assign(&col);
    }
    let (residual_norms, converged) = residuals(op, &values, &vectors, opts.tol);
    Ok(EigenPairs {
        values,
        vectors,
        converged,
        residual_norms,
        near_degenerate,
    })
}

/// Ritz pair harvested by the Lanczos sweeps.
struct RitzPair {
    value: f64,
    vector: Vec<f64>,
    est_residual: f64,
}

fn lanczos_top_k<O: SymOp + ?Sized>(op: &O, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = op.dim();
    // Lock a couple more pairs than requested so the final top-k-by-|value|
    // selection draws from a slightly wider converged set.
    let target = (k + 2).min(n);
    let dim_budget = if opts.krylov_dim > 0 {
        opts.krylov_dim
    } else {
        (2 * k + 40).clamp(8.min(n), n)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<RitzPair> = Vec::new();
    let mut leftovers: Vec<RitzPair> = Vec::new(); // best unconverged estimates
    let mut warm: Option<Vec<f64>> = None;

    for _restart in 0..opts.max_restarts {
        if locked.len() >= target {
            break;
        }
        let budget = dim_budget.min(n - locked.len());
        if budget == 0 {
            break;
        }
        // Warm-start from the best unconverged Ritz direction of the last
        // sweep; clustered eigenvalues converge far faster this way than
        // from a fresh random vector.
        let v0 = warm
            .take()
            .and_then(|mut wv| {
                for _ in 0..2 {
                    for l in &locked {
                        let c = dot(&l.vector, &wv);
                        axpy(-c, &l.vector, &mut wv);
                    }
                }
                let nrm = norm(&wv);
                (nrm > 1e-6).then(|| {
                    scale(1.0 / nrm, &mut wv);
                    wv
                })
            })
            .or_else(|| deflated_start(&mut rng, n, &locked));
        let Some(v0) = v0 else {
            break; // orthogonal complement exhausted
        };
        let mut basis: Vec<Vec<f64>> = vec![v0];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let mut last_beta = 0.0;
        for j in 0..budget {
            op.apply(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w);
            alphas.push(alpha);
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= alpha * vi;
            }
            if j > 0 {
                let b = betas[j - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= b * vi;
                }
            }
            // Full reorthogonalization against the basis and the locked
            // pairs, twice; once is not enough when eigenvalues cluster.
            for _ in 0..2 {
                for l in &locked {
                    let c = dot(&l.vector, &w);
                    axpy(-c, &l.vector, &mut w);
                }
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let beta = norm(&w);
            last_beta = beta;
            if j + 1 == budget || beta < 1e-12 {
                break; // budget reached or invariant subspace found
            }
            betas.push(beta);
            let mut next = w.clone();
            scale(1.0 / beta, &mut next);
            basis.push(next);
        }

        let m = alphas.len();
        if m == 0 {
            continue;
        }
        let mut t = Array2::zeros((m, m));
        for i in 0..m {
            t[[i, i]] = alphas[i];
            if i + 1 < m {
                t[[i, i + 1]] = betas[i];
                t[[i + 1, i]] = betas[i];
            }
        }
        let (tvals, tvecs) = t
            .eigh(ndarray_linalg::UPLO::Lower)
            .map_err(|e| Error::Eigen(format!("tridiagonal section failed: {e}")))?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| tvals[b].abs().partial_cmp(&tvals[a].abs()).unwrap());
        leftovers.clear();
        for &idx in &order {
            let theta = tvals[idx];
            let est = (last_beta * tvecs[[m - 1, idx]]).abs();
            let mut u = vec![0.0; n];
            for (j, v) in basis.iter().enumerate() {
                axpy(tvecs[[j, idx]], v, &mut u);
            }
            for l in &locked {
                let c = dot(&l.vector, &u);
                axpy(-c, &l.vector, &mut u);
            }
            let nrm = norm(&u);
            if nrm < 1e-8 {
                continue;
            }
            scale(1.0 / nrm, &mut u);
            let pair = RitzPair {
                value: theta,
                vector: u,
                est_residual: est,
            };
            // Lock two orders tighter than the reported tolerance so the
            // eigenvalue error (quadratic in the residual only for clean
            // gaps) stays below the value-level tolerance too.
            if est <= 1e-2 * opts.tol * theta.abs().max(1.0) && locked.len() < target {
                locked.push(pair);
            } else if leftovers.len() < target {
                leftovers.push(pair);
            }
        }
        warm = leftovers.first().map(|l| l.vector.clone());
    }

    // Final ranking: converged pairs by |value|, then the best unconverged
    // estimates to fill up to k (reported with converged = false).
    locked.sort_by(|a, b| {
        b.value
            .abs()
            .partial_cmp(&a.value.abs())
            .unwrap()
            .then(b.value.partial_cmp(&a.value).unwrap())
    });
    let mut chosen = locked;
    if chosen.len() < k {
        leftovers.sort_by(|a, b| b.value.abs().partial_cmp(&a.value.abs()).unwrap());
        for l in leftovers {
            if chosen.len() >= k {
                break;
            }
            chosen.push(l);
        }
    }
    if chosen.len() < k {
        return Err(Error::Eigen(format!(
            "found only {} of {k} requested pairs",
            chosen.len()
        )));
    }

    let spread_proxy = {
        let hi = chosen.iter().map(|l| l.value).fold(f64::NEG_INFINITY, f64::max);
        let lo = chosen.iter().map(|l| l.value).fold(f64::INFINITY, f64::min);
        (hi - lo).max(chosen[0].value.abs())
    };
    let boundary = k.min(chosen.len() - 1);
    let mut near_degenerate = false;
    for i in 0..boundary {
        let gap = (chosen[i].value.abs() - chosen[i + 1].value.abs()).abs();
        if gap < DEGENERACY_REL_GAP * spread_proxy.max(f64::MIN_POSITIVE) {
            near_degenerate = true;
        }
    }
    chosen.truncate(k);

    let mut vectors = Array2::zeros((n, k));
    let mut values = Vec::with_capacity(k);
    for (c, l) in chosen.iter().enumerate() {
        let _ = l.est_residual;
        values.push(l.value);
        let mut col = l.vector.clone();
        canonicalize_sign(&mut col);
        for (i, &v) in col.iter().enumerate() {
            vectors[[i, c]] = v;
        }
    }
    let (residual_norms, converged) = residuals(op, &values, &vectors, opts.tol);
    Ok(EigenPairs {
        values,
        vectors,
        converged,
        residual_norms,
        near_degenerate,
    })
}

fn deflated_start(rng: &mut ChaCha8Rng, n: usize, locked: &[RitzPair]) -> Option<Vec<f64>> {
    for _attempt in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for _ in 0..2 {
            for l in locked {
                let c = dot(&l.vector, &v);
                axpy(-c, &l.vector, &mut v);
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-6 {
            scale(1.0 / nrm, &mut v);
            return Some(v);
        }
    }
    None
}

fn residuals<O: SymOp + ?Sized>(
    op: &O,
    values: &[f64],
    vectors: &Array2<f64>,
    tol: f64,
) -> (Vec<f64>, Vec<bool>) {
    let n = vectors.nrows();
    let mut res = Vec::with_capacity(values.len());
    let mut conv = Vec::with_capacity(values.len());
    let mut y = vec![0.0; n];
    for (c, &lam) in values.iter().enumerate() {
        let col: Vec<f64> = vectors.column(c).to_vec();
        op.apply(&col, &mut y);
        let mut acc = 0.0;
        for i in 0..n {
            let d = y[i] - lam * col[i];
            acc += d * d;
        }
        let r = acc.sqrt();
        res.push(r);
        conv.push(r <= tol * lam.abs().max(1.0));
    }
    (res, conv)
}

/// Flips the vector so its entry of largest magnitude is positive; ties go
/// to the lowest index.
fn canonicalize_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn scale(c: f64, v: &mut [f64]) {
    for x in v.iter_mut() {
        *x *= c;
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Leading empirical eigenvalue of the adjacency matrix.
pub fn adjacency_top_eigenvalue(g: &Graph, opts: &EigenOptions) -> Result<f64> {
    if g.node_count() == 0 || g.edge_count() == 0 {
        return Ok(0.0);
    }
    let op = AdjacencyOp::new(g);
    Ok(top_k_eigenpairs(&op, 1, opts)?.values[0])
}

/// Eigenvalues as an `Array1`.
pub fn values_array(pairs: &EigenPairs) -> Array1<f64> {
    Array1::from_vec(pairs.values.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{sample, BlockModelParams};
    use approx::assert_abs_diff_eq;

    fn lanczos_opts(seed: u64) -> EigenOptions {
        EigenOptions {
            backend: EigenBackend::Lanczos,
            seed,
            ..EigenOptions::default()
        }
    }

    #[test]
    fn two_by_two_swap_matrix() {
        let m = ndarray::arr2(&[[0.0, 1.0], [1.0, 0.0]]);
        let p = top_k_eigenpairs_matrix(&m, 2, &EigenOptions::default()).unwrap();
        assert_abs_diff_eq!(p.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.values[1], -1.0, epsilon = 1e-12);
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(p.vectors[[0, 0]], s, epsilon = 1e-12);
        assert_abs_diff_eq!(p.vectors[[1, 0]], s, epsilon = 1e-12);
        assert_abs_diff_eq!(p.vectors[[0, 1]], s, epsilon = 1e-12);
        assert_abs_diff_eq!(p.vectors[[1, 1]], -s, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_matrix_top_two() {
        let m = Array2::from_diag(&ndarray::arr1(&[3.0, 2.0, 1.0]));
        let p = top_k_eigenpairs_matrix(&m, 2, &EigenOptions::default()).unwrap();
        assert_eq!(p.values, vec![3.0, 2.0]);
        assert!(p.converged.iter().all(|&c| c));
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let m = ndarray::arr2(&[[0.0, 1.0], [0.5, 0.0]]);
        assert!(top_k_eigenpairs_matrix(&m, 1, &EigenOptions::default()).is_err());
    }

    #[test]
    fn normalize_adjacency_examples() {
        let single = Graph::new(2, &[(0, 1)]).unwrap();
        let m = normalize_adjacency(&single).unwrap();
        assert_eq!(m, ndarray::arr2(&[[0.0, 1.0], [1.0, 0.0]]));

        let tri = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let m = normalize_adjacency(&tri).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert_abs_diff_eq!(m[[i, j]], want, epsilon = 1e-15);
            }
        }

        let star = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let m = normalize_adjacency(&star).unwrap();
        assert_abs_diff_eq!(m[[0, 1]], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn normalize_adjacency_names_zero_degree_node() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        match normalize_adjacency(&g) {
            Err(Error::ZeroDegree(i)) => assert_eq!(i, 2),
            other => panic!("expected zero-degree error, got {other:?}"),
        }
    }

    #[test]
    fn normalized_leading_pair_is_sqrt_degree_vector() {
        // On a connected graph, (1, <sqrt(d_i/E)>) is the exact leading
        // pair; verify by direct substitution.
        let params = BlockModelParams::new(150, 0.5, 0.2, 0.2, 0.1).unwrap();
        let (g, _) = sample(&params, 11).unwrap();
        let (lcc, _) = g.largest_connected_component();
        let op = NormalizedAdjacencyOp::new(&lcc).unwrap();
        for backend in [EigenBackend::Dense, EigenBackend::Lanczos] {
            let opts = EigenOptions {
                backend,
                ..EigenOptions::default()
            };
            let p = top_k_eigenpairs(&op, 2, &opts).unwrap();
            assert_abs_diff_eq!(p.values[0], 1.0, epsilon = 1e-8);
            let e: f64 = lcc.degrees().iter().map(|&d| d as f64).sum();
            for i in 0..lcc.node_count() {
                let want = (lcc.degree(i) as f64 / e).sqrt();
                assert_abs_diff_eq!(p.vectors[[i, 0]], want, epsilon = 1e-7);
            }
            assert!(p.values.iter().all(|&v| v.abs() <= 1.0 + 1e-8));
        }
    }

    #[test]
    fn lanczos_matches_dense_oracle_on_sbm_samples() {
        // nalgebra's full decomposition is the independent oracle; top-k
        // values to 1e-8 and subspaces to principal angle <= 1e-6.
        let mut seed = 100u64;
        for &(n, pi, a, b, g) in &[
            (120usize, 0.5, 0.3, 0.3, 0.05),
            (150, 0.4, 0.25, 0.4, 0.1),
            (180, 0.5, 0.15, 0.15, 0.18),
        ] {
            seed += 1;
            let params = BlockModelParams::new(n, pi, a, b, g).unwrap();
            let (graph, _) = sample(&params, seed).unwrap();
            let (lcc, _) = graph.largest_connected_component();
            for normalized in [false, true] {
                let (mine, dense_m) = if normalized {
                    let op = NormalizedAdjacencyOp::new(&lcc).unwrap();
                    (
                        top_k_eigenpairs(&op, 3, &lanczos_opts(7)).unwrap(),
                        op.to_dense(),
                    )
                } else {
                    let op = AdjacencyOp::new(&lcc);
                    (
                        top_k_eigenpairs(&op, 3, &lanczos_opts(7)).unwrap(),
                        op.to_dense(),
                    )
                };
                let nn = lcc.node_count();
                let dm = nalgebra::DMatrix::from_fn(nn, nn, |i, j| dense_m[[i, j]]);
                let eig = nalgebra::SymmetricEigen::new(dm);
                let mut idx: Vec<usize> = (0..nn).collect();
                idx.sort_by(|&i, &j| {
                    eig.eigenvalues[j]
                        .abs()
                        .partial_cmp(&eig.eigenvalues[i].abs())
                        .unwrap()
                });
                for c in 0..3 {
                    assert_abs_diff_eq!(mine.values[c], eig.eigenvalues[idx[c]], epsilon = 1e-8);
                }
                // Principal angle between the 3-dim subspaces via the
                // singular values of Q1^T Q2.
                let q1 = nalgebra::DMatrix::from_fn(nn, 3, |i, c| mine.vectors[[i, c]]);
                let q2 = nalgebra::DMatrix::from_fn(nn, 3, |i, c| eig.eigenvectors[(i, idx[c])]);
                let cross = q1.transpose() * q2;
                let svd = cross.svd(false, false);
                let min_sigma = svd
                    .singular_values
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                let angle = min_sigma.min(1.0).acos();
                assert!(angle <= 1e-6, "principal angle {angle} too large");
            }
        }
    }

    #[test]
    fn degenerate_two_component_graph_flags_and_spans() {
        // Two disjoint cliques: the normalized adjacency has eigenvalue 1
        // twice; the solver must find both directions and set the flag.
        let mut edges = Vec::new();
        for i in 0..8 {
            for j in (i + 1)..8 {
                edges.push((i, j));
                edges.push((8 + i, 8 + j));
            }
        }
        let g = Graph::new(16, &edges).unwrap();
        let op = NormalizedAdjacencyOp::new(&g).unwrap();
        for backend in [EigenBackend::Dense, EigenBackend::Lanczos] {
            let opts = EigenOptions {
                backend,
                ..EigenOptions::default()
            };
            let p = top_k_eigenpairs(&op, 2, &opts).unwrap();
            assert_abs_diff_eq!(p.values[0], 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(p.values[1], 1.0, epsilon = 1e-9);
            assert!(p.near_degenerate);
            // The span must cover both components: each component carries
            // unit mass within the 2-dim subspace.
            for comp in 0..2 {
                let mass: f64 = (0..8)
                    .map(|i| {
                        let node = comp * 8 + i;
                        p.vectors[[node, 0]].powi(2) + p.vectors[[node, 1]].powi(2)
                    })
                    .sum();
                assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn residual_bound_holds_on_random_samples() {
        // 200 random SBM samples, both A and its normalized variant.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..200u64 {
            let n = 40 + (rng.random::<u64>() % 60) as usize;
            let pi = 0.3 + rng.random::<f64>() * 0.4;
            let a = 0.1 + rng.random::<f64>() * 0.5;
            let b = 0.1 + rng.random::<f64>() * 0.5;
            let g = rng.random::<f64>() * 0.3;
            let params = match BlockModelParams::new(n, pi, a, b, g) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let (graph, _) = sample(&params, 1000 + trial).unwrap();
            if graph.edge_count() == 0 {
                continue;
            }
            let op = AdjacencyOp::new(&graph);
            let p = top_k_eigenpairs(&op, 2, &lanczos_opts(trial)).unwrap();
            for (i, &c) in p.converged.iter().enumerate() {
                if c {
                    assert!(p.residual_norms[i] <= 1e-8 * p.values[i].abs().max(1.0));
                }
            }
            let (lcc, _) = graph.largest_connected_component();
            if lcc.node_count() < 4 {
                continue;
            }
            let nop = NormalizedAdjacencyOp::new(&lcc).unwrap();
            let p = top_k_eigenpairs(&nop, 2, &lanczos_opts(trial)).unwrap();
            for (i, &c) in p.converged.iter().enumerate() {
                if c {
                    assert!(p.residual_norms[i] <= 1e-8 * p.values[i].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn starved_solver_reports_nonconvergence() {
        let params = BlockModelParams::new(80, 0.5, 0.4, 0.4, 0.05).unwrap();
        let (graph, _) = sample(&params, 3).unwrap();
        let op = AdjacencyOp::new(&graph);
        let opts = EigenOptions {
            backend: EigenBackend::Lanczos,
            krylov_dim: 3,
            max_restarts: 1,
            ..EigenOptions::default()
        };
        let p = top_k_eigenpairs(&op, 3, &opts).unwrap();
        assert_eq!(p.values.len(), 3);
        assert!(
            p.converged.iter().any(|&c| !c),
            "3 Krylov steps cannot converge 3 pairs"
        );
    }

    #[test]
    fn columns_orthonormal_and_sign_canonical() {
        let params = BlockModelParams::new(300, 0.5, 0.15, 0.15, 0.02).unwrap();
        let (graph, _) = sample(&params, 21).unwrap();
        let op = AdjacencyOp::new(&graph);
        let p = top_k_eigenpairs(&op, 4, &lanczos_opts(5)).unwrap();
        for c in 0..4 {
            let col: Vec<f64> = p.vectors.column(c).to_vec();
            assert_abs_diff_eq!(norm(&col), 1.0, epsilon = 1e-10);
            let mut best = 0;
            for (i, &x) in col.iter().enumerate() {
                if x.abs() > col[best].abs() {
                    best = i;
                }
            }
            assert!(col[best] > 0.0, "column {c} sign not canonical");
            for c2 in 0..c {
                let col2: Vec<f64> = p.vectors.column(c2).to_vec();
                assert_abs_diff_eq!(dot(&col, &col2), 0.0, epsilon = 1e-8);
            }
        }
        assert!(p.values[0].abs() >= p.values[1].abs());
        assert!(p.values[1].abs() >= p.values[2].abs());
    }
}
