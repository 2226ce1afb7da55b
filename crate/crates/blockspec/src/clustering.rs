//! Lloyd's kmeans with k-means++ seeding, the restart-and-balance selection
//! rule, and the end-to-end spectral clustering pipeline.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::{top_k_eigenpairs, AdjacencyOp, EigenOptions, NormalizedAdjacencyOp};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Rows of the top-k eigenvector matrix, one embedding point per node.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    pub coords: Array2<f64>,
    pub eigenvalues: Vec<f64>,
    /// Whether the decomposed matrix was the degree-normalized adjacency.
    pub normalized: bool,
}

/// A clustering of embedded points.
#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// Cluster centers, one row per cluster.
    pub centers: Array2<f64>,
    pub within_ss: f64,
    /// Size of the smallest cluster.
    pub balance: usize,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.centers.nrows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.centers.nrows()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Options for the spectral pipeline; the defaults reproduce the standard
/// protocol (5 restarts, raw eigenvector rows).
#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub eigen: EigenOptions,
    pub restarts: usize,
    pub max_iters: usize,
    /// Scale each embedding row to unit length before kmeans. Off by
    /// default: the pipeline clusters raw eigenvector rows.
    pub row_normalize: bool,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            eigen: EigenOptions::default(),
            restarts: 5,
            max_iters: 100,
            row_normalize: false,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd iterations from k-means++ seeding until the assignment stops
/// changing or `max_iters` is reached. Deterministic given `seed`. An
/// empty cluster is re-seeded at the point farthest from its assigned
/// center (ties: lowest point index).
pub fn kmeans(
    points: ArrayView2<f64>,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterAssignment> {
    let n = points.nrows();
    let dim = points.ncols();
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("k = {k} out of range for {n} points")));
    }
    let owned;
    let view = if points.as_slice().is_some() {
        points
    } else {
        owned = points.to_owned();
        owned.view()
    };
    let rows: Vec<&[f64]> = (0..n).map(|i| view.row(i).to_slice().unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);

    // k-means++ seeding.
    let first = (rng.random::<f64>() * n as f64) as usize % n;
    centers.push(rows[first].to_vec());
    let mut dist2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining points coincide with some center; pick by index.
            centers.len() % n
        };
        centers.push(rows[pick].to_vec());
        let c = centers.last().unwrap();
        for (i, r) in rows.iter().enumerate() {
            let d = sq_dist(r, c);
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
    }

    lloyd(&rows, dim, centers, max_iters)
}

/// Lloyd iterations from caller-provided initial centers (used when
/// transferring a fitted model to a fresh embedding).
pub fn kmeans_from_centers(
    points: ArrayView2<f64>,
    initial_centers: ArrayView2<f64>,
    max_iters: usize,
) -> Result<ClusterAssignment> {
    let n = points.nrows();
    let k = initial_centers.nrows();
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("k = {k} out of range for {n} points")));
    }
    if initial_centers.ncols() != points.ncols() {
        return Err(Error::Invalid(format!(
            "center dim {} != point dim {}",
            initial_centers.ncols(),
            points.ncols()
        )));
    }
    let owned;
    let view = if points.as_slice().is_some() {
        points
    } else {
        owned = points.to_owned();
        owned.view()
    };
    let rows: Vec<&[f64]> = (0..n).map(|i| view.row(i).to_slice().unwrap()).collect();
    let centers: Vec<Vec<f64>> = (0..k).map(|c| initial_centers.row(c).to_vec()).collect();
    lloyd(&rows, points.ncols(), centers, max_iters)
}

fn lloyd(
    rows: &[&[f64]],
    dim: usize,
    mut centers: Vec<Vec<f64>>,
    max_iters: usize,
) -> Result<ClusterAssignment> {
    let n = rows.len();
    let k = centers.len();
    let mut labels = vec![usize::MAX; n];
    let mut prev_ss = f64::INFINITY;

    for _iter in 0..max_iters.max(1) {
        // Assignment step: nearest center, ties to the lowest index.
        let mut changed = false;
        let mut ss = 0.0;
        for (i, r) in rows.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = sq_dist(r, &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let d = sq_dist(r, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            ss += best_d;
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        // Objective must never increase across Lloyd iterations.
        debug_assert!(
            ss <= prev_ss * (1.0 + 1e-12) + 1e-12,
            "within_ss increased: {prev_ss} -> {ss}"
        );
        prev_ss = ss;
        if !changed {
            break;
        }

        // Update step: means, with empty clusters re-seeded at the point
        // farthest from its assigned center.
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0f64; dim]; k];
        for (i, r) in rows.iter().enumerate() {
            counts[labels[i]] += 1;
            for (s, &x) in sums[labels[i]].iter_mut().zip(r.iter()) {
                *s += x;
            }
        }
        let mut farthest: Option<usize> = None;
        for c in 0..k {
            if counts[c] > 0 {
                for (j, s) in sums[c].iter().enumerate() {
                    centers[c][j] = s / counts[c] as f64;
                }
            } else {
                let f = *farthest.get_or_insert_with(|| {
                    let mut best = 0usize;
                    let mut best_d = -1.0;
                    for (i, r) in rows.iter().enumerate() {
                        let d = sq_dist(r, &centers[labels[i]]);
                        if d > best_d {
                            best_d = d;
                            best = i;
                        }
                    }
                    best
                });
                centers[c] = rows[f].to_vec();
            }
        }
    }

    // Final objective against the final centers.
    let mut ss = 0.0;
    for (i, r) in rows.iter().enumerate() {
        ss += sq_dist(r, &centers[labels[i]]);
    }
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let balance = sizes.iter().copied().min().unwrap_or(0);
    let mut centers_arr = Array2::zeros((k, dim));
    for (c, center) in centers.iter().enumerate() {
        for (j, &v) in center.iter().enumerate() {
            centers_arr[[c, j]] = v;
        }
    }
    Ok(ClusterAssignment {
        labels,
        centers: centers_arr,
        within_ss: ss,
        balance,
    })
}

/// Runs `restarts` independently seeded kmeans (seed xor run index) and
/// keeps the run whose smallest cluster is largest; ties go to the smaller
/// within-cluster sum of squares, then to the earlier run.
pub fn kmeans_balanced_best(
    points: ArrayView2<f64>,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<ClusterAssignment> {
    if restarts == 0 {
        return Err(Error::Invalid("restarts must be >= 1".into()));
    }
    let runs: Vec<ClusterAssignment> = (0..restarts)
        .map(|r| kmeans(points, k, seed ^ r as u64, max_iters))
        .collect::<Result<_>>()?;
    Ok(select_most_balanced(runs))
}

/// Selection rule shared by the restart loop: balance descending, then
/// within_ss ascending, then run order.
pub(crate) fn select_most_balanced(runs: Vec<ClusterAssignment>) -> ClusterAssignment {
    runs.into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            b.balance
                .cmp(&a.balance)
                .then(a.within_ss.partial_cmp(&b.within_ss).unwrap())
                .then(ia.cmp(ib))
        })
        .map(|(_, a)| a)
        .expect("at least one run")
}

/// Embeds the graph with the top-k eigenvectors of A (or its normalized
/// variant) and clusters the rows with the balanced-restart kmeans.
pub fn spectral_cluster(
    g: &Graph,
    k: usize,
    normalized: bool,
    seed: u64,
) -> Result<(ClusterAssignment, SpectralEmbedding)> {
    spectral_cluster_with(g, k, normalized, seed, &SpectralOptions::default())
}

pub fn spectral_cluster_with(
    g: &Graph,
    k: usize,
    normalized: bool,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<(ClusterAssignment, SpectralEmbedding)> {
    let embedding = spectral_embedding(g, k, normalized, seed, opts)?;
    let points = if opts.row_normalize {
        let mut m = embedding.coords.clone();
        for mut row in m.rows_mut() {
            let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|x| x / norm);
            }
        }
        m
    } else {
        embedding.coords.clone()
    };
    let assignment = kmeans_balanced_best(points.view(), k, seed, opts.restarts, opts.max_iters)?;
    Ok((assignment, embedding))
}

/// Just the embedding half of the pipeline.
pub fn spectral_embedding(
    g: &Graph,
    k: usize,
    normalized: bool,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<SpectralEmbedding> {
    let mut eigen_opts = opts.eigen.clone();
    // Decouple the solver's start vectors from the kmeans seed stream.
    eigen_opts.seed = mix_seed(seed, 0xE16E);
    let pairs = if normalized {
        let op = NormalizedAdjacencyOp::new(g)?;
        top_k_eigenpairs(&op, k, &eigen_opts)?
    } else {
        let op = AdjacencyOp::new(g);
        top_k_eigenpairs(&op, k, &eigen_opts)?
    };
    Ok(SpectralEmbedding {
        coords: pairs.vectors,
        eigenvalues: pairs.values,
        normalized,
    })
}

/// Orthogonal matrix R minimizing ||A R - B||_F (classic Procrustes
/// alignment); A and B are n x k with matching shapes.
pub fn orthogonal_procrustes(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<Array2<f64>> {
    use ndarray_linalg::SVD;
    if a.shape() != b.shape() {
        return Err(Error::Invalid(format!(
            "shape mismatch {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let m = a.t().dot(&b);
    let (u, _s, vt) = m
        .svd(true, true)
        .map_err(|e| Error::Eigen(format!("procrustes svd failed: {e}")))?;
    let u = u.expect("svd with u requested");
    let vt = vt.expect("svd with vt requested");
    Ok(u.dot(&vt))
}

/// SplitMix64 finalizer; used to derive decoupled seeds for the different
/// random roles of one experiment.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
