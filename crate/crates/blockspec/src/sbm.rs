//! Two-class stochastic blockmodel: parameter validation, seeded sampling,
//! population matrices and their closed-form spectra, and the analytic
//! within-class variance / between-center bias predictions.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabeling};

/// Parameters `(n, pi, alpha, beta, gamma)` of a two-class blockmodel.
/// `alpha` and `beta` are the within-class edge probabilities of classes 1
/// and 2, `gamma` the cross-class probability, `pi` the fraction of nodes
/// in class 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockModelParams {
    pub n: usize,
    pub pi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Expected degree over `n` for each class and overall (the density scale
/// every normalized-spectrum formula is written in).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationDensities {
    pub mu1: f64,
    pub mu2: f64,
    pub mu: f64,
}

/// Closed-form principal eigenpairs of the population matrices: `lambda*`,
/// `x*`, `y*` for the unnormalized expectation and `nu*`, `xt*`, `yt*` for
/// its degree-normalized counterpart. Eigenvectors are piecewise constant;
/// only the blockwise entries are stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub xt1: f64,
    pub xt2: f64,
    pub yt1: f64,
    pub yt2: f64,
}

/// Asymptotic predictions for the class-1 quality metrics, plus the
/// normalized-over-unnormalized variance ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticDistances {
    pub d11_sq_unnorm: f64,
    pub d12_sq_unnorm: f64,
    pub d11_sq_norm: f64,
    pub d12_sq_norm: f64,
    pub ratio_d11: f64,
}

impl BlockModelParams {
    pub fn new(n: usize, pi: f64, alpha: f64, beta: f64, gamma: f64) -> Result<BlockModelParams> {
        let p = BlockModelParams {
            n,
            pi,
            alpha,
            beta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n = {} < 2", self.n)));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return Err(Error::InvalidParams(format!("pi = {} not in (0,1)", self.pi)));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::InvalidParams(format!("{name} = {v} not in [0,1]")));
            }
        }
        let n1 = self.class1_size();
        if n1 < 1 || self.n - n1 < 1 {
            return Err(Error::InvalidParams(format!(
                "class sizes ({}, {}) must both be >= 1",
                n1,
                self.n - n1
            )));
        }
        Ok(())
    }

    /// Number of class-1 nodes, `round(n * pi)`.
    pub fn class1_size(&self) -> usize {
        (self.n as f64 * self.pi).round() as usize
    }

    pub fn class_sizes(&self) -> (usize, usize) {
        let n1 = self.class1_size();
        (n1, self.n - n1)
    }

    /// `pi` re-derived from the realized integer class sizes; every formula
    /// downstream uses this value.
    pub fn effective_pi(&self) -> f64 {
        self.class1_size() as f64 / self.n as f64
    }

    /// True when `alpha * beta == gamma^2`, making the expectation matrix
    /// rank one and the second population eigenpair meaningless.
    pub fn is_degenerate(&self) -> bool {
        (self.alpha * self.beta - self.gamma * self.gamma).abs() < 1e-12
    }

    /// Largest edge probability: the rate scale `rho`.
    pub fn rho(&self) -> f64 {
        self.alpha.max(self.beta).max(self.gamma)
    }

    /// `log n / (n rho)`; small values indicate the semi-sparse regime.
    /// Reported as a diagnostic, never enforced.
    pub fn semi_sparse_diagnostic(&self) -> f64 {
        (self.n as f64).ln() / (self.n as f64 * self.rho())
    }

    pub fn densities(&self) -> PopulationDensities {
        let n = self.n as f64;
        let pi = self.effective_pi();
        let mu1 = pi * self.alpha + (1.0 - pi) * self.gamma - self.alpha / n;
        let mu2 = pi * self.gamma + (1.0 - pi) * self.beta - self.beta / n;
        let mu = pi * mu1 + (1.0 - pi) * mu2;
        PopulationDensities { mu1, mu2, mu }
    }

    /// Parameters with the two classes exchanged; evaluating the class-1
    /// formulas on the swap yields the class-2 quantities.
    pub fn swapped(&self) -> BlockModelParams {
        let (n1, n2) = self.class_sizes();
        let _ = n1;
        BlockModelParams {
            n: self.n,
            pi: n2 as f64 / self.n as f64,
            alpha: self.beta,
            beta: self.alpha,
            gamma: self.gamma,
        }
    }

    /// True labeling used by the sampler: nodes `0..n1` are class 0.
    pub fn labeling(&self) -> NodeLabeling {
        let (n1, n2) = self.class_sizes();
        let mut labels = vec![0usize; n1];
        labels.extend(std::iter::repeat(1).take(n2));
        NodeLabeling::with_classes(labels, 2)
    }

    fn edge_probability(&self, c1: usize, c2: usize) -> f64 {
        match (c1, c2) {
            (0, 0) => self.alpha,
            (1, 1) => self.beta,
            _ => self.gamma,
        }
    }
}

/// Samples a graph from the blockmodel. Each unordered pair `(i, j)` with
/// `i < j` is included independently with its class-pair probability; draws
/// are consumed in row-major order of the upper triangle, so the result is
/// bit-reproducible given `(params, seed)`.
pub fn sample(params: &BlockModelParams, seed: u64) -> Result<(Graph, NodeLabeling)> {
    params.validate()?;
    let labeling = params.labeling();
    let labels = labeling.labels();
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        let li = labels[i];
        for j in (i + 1)..n {
            let p = params.edge_probability(li, labels[j]);
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok((Graph::from_sorted_unique(n, edges), labeling))
}

/// Samples a temporal stream of snapshots over one node universe. Edges
/// recur across time: every snapshot is the union of a shared core (rates
/// scaled by `persistence`) and an independent per-snapshot draw (rates
/// scaled by `1 - persistence`), keeping the per-snapshot density near the
/// nominal rates while making links reappear the way co-authorships do.
pub fn sample_snapshot_stream(
    params: &BlockModelParams,
    count: usize,
    persistence: f64,
    seed: u64,
) -> Result<(Vec<Graph>, NodeLabeling)> {
    if count == 0 {
        return Err(Error::InvalidParams("stream needs at least one snapshot".into()));
    }
    if !(0.0..=1.0).contains(&persistence) {
        return Err(Error::InvalidParams(format!(
            "persistence = {persistence} not in [0,1]"
        )));
    }
    let scale = |f: f64| BlockModelParams {
        n: params.n,
        pi: params.pi,
        alpha: params.alpha * f,
        beta: params.beta * f,
        gamma: params.gamma * f,
    };
    let core_params = scale(persistence);
    let fresh_params = scale(1.0 - persistence);
    let (core, labeling) = sample(&core_params, seed ^ 0xC0DE_CAFE)?;
    let mut snaps = Vec::with_capacity(count);
    for t in 0..count {
        let (fresh, _) = sample(&fresh_params, seed ^ (t as u64 + 1))?;
        snaps.push(Graph::merge_snapshots(&[core.clone(), fresh])?);
    }
    Ok((snaps, labeling))
}

const DENSE_POPULATION_LIMIT: usize = 10_000;

/// Conditional expectation matrix `P`: blockwise constant with zero diagonal.
pub fn population_matrix(params: &BlockModelParams) -> Result<Array2<f64>> {
    params.validate()?;
    if params.n > DENSE_POPULATION_LIMIT {
        return Err(Error::InvalidParams(format!(
            "n = {} too large to materialize densely (limit {})",
            params.n, DENSE_POPULATION_LIMIT
        )));
    }
    let labels = params.labeling();
    let n = params.n;
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[[i, j]] = params.edge_probability(labels.label(i), labels.label(j));
            }
        }
    }
    Ok(m)
}

/// Expected-degree normalized expectation matrix, `D^{-1/2} P D^{-1/2}`
/// with `D_ii = n mu_1` or `n mu_2` by class.
pub fn population_matrix_normalized(params: &BlockModelParams) -> Result<Array2<f64>> {
    let d = params.densities();
    if d.mu1 <= 0.0 || d.mu2 <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "class isolated in expectation: mu1 = {}, mu2 = {}",
            d.mu1, d.mu2
        )));
    }
    let mut m = population_matrix(params)?;
    let labels = params.labeling();
    let n = params.n as f64;
    let inv_sqrt: Vec<f64> = (0..params.n)
        .map(|i| {
            let mu = if labels.label(i) == 0 { d.mu1 } else { d.mu2 };
            1.0 / (n * mu).sqrt()
        })
        .collect();
    for i in 0..params.n {
        for j in 0..params.n {
            m[[i, j]] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    Ok(m)
}

/// Eigenvalues and blockwise eigenvector entries of the symmetric reduced
/// 2x2 matrix `[[n pi a, n sqrt(pi(1-pi)) g], [., n(1-pi) b]]`, ordered by
/// descending absolute eigenvalue (ties broken by descending signed value).
/// Entries are scaled back to full-vector coordinates.
fn reduced_spectrum(params: &BlockModelParams) -> (f64, f64, [f64; 2], [f64; 2]) {
    let n = params.n as f64;
    let pi = params.effective_pi();
    let a = n * pi * params.alpha;
    let b = n * (1.0 - pi) * params.beta;
    let c = n * (pi * (1.0 - pi)).sqrt() * params.gamma;
    let half_tr = 0.5 * (a + b);
    let disc = 0.5 * (a - b).hypot(2.0 * c);
    let lp = half_tr + disc;
    let lm = half_tr - disc;
    let (l1, l2) = if lp.abs() > lm.abs() || (lp.abs() == lm.abs() && lp >= lm) {
        (lp, lm)
    } else {
        (lm, lp)
    };
    let vec_for = |lam: f64| -> [f64; 2] {
        let mut v = if c == 0.0 {
            // Diagonal reduced matrix: classes decouple.
            if (lam - a).abs() <= (lam - b).abs() {
                [1.0, 0.0]
            } else {
                [0.0, 1.0]
            }
        } else if (lam - a).abs() > (lam - b).abs() {
            [c, lam - a]
        } else {
            [lam - b, c]
        };
        let norm = v[0].hypot(v[1]);
        v[0] /= norm;
        v[1] /= norm;
        // Canonical sign: first nonzero coordinate positive.
        if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
            v[0] = -v[0];
            v[1] = -v[1];
        }
        v
    };
    (l1, l2, vec_for(l1), vec_for(l2))
}

/// Closed-form principal spectra of `P` (via the reduced 2x2 matrix,
/// ignoring the O(rho) zero-diagonal correction) and of its normalized
/// counterpart.
pub fn population_spectrum(params: &BlockModelParams) -> Result<PopulationSpectrum> {
    params.validate()?;
    if params.is_degenerate() {
        return Err(Error::DegenerateModel);
    }
    Ok(population_spectrum_unchecked(params))
}

pub(crate) fn population_spectrum_unchecked(params: &BlockModelParams) -> PopulationSpectrum {
    let n = params.n as f64;
    let pi = params.effective_pi();
    let (l1, l2, v1, v2) = reduced_spectrum(params);
    let sx = (n * pi).sqrt();
    let sy = (n * (1.0 - pi)).sqrt();

    let d = params.densities();
    let nu2 = 1.0 - params.gamma * d.mu / (d.mu1 * d.mu2);
    let xt1 = (d.mu1 / (n * d.mu)).sqrt();
    let yt1 = (d.mu2 / (n * d.mu)).sqrt();
    let xt2 = ((1.0 - pi) * d.mu2 / (n * pi * d.mu)).sqrt();
    let yt2 = -(pi * d.mu1 / (n * (1.0 - pi) * d.mu)).sqrt();

    PopulationSpectrum {
        lambda1: l1,
        lambda2: l2,
        x1: v1[0] / sx,
        x2: v2[0] / sx,
        y1: v1[1] / sy,
        y2: v2[1] / sy,
        nu1: 1.0,
        nu2,
        xt1,
        xt2,
        yt1,
        yt2,
    }
}

/// Closed-form limit of `d11^2 (normalized) / d11^2 (unnormalized)` for the
/// equal-class, `beta = alpha`, `gamma = x alpha` model as the rate goes to
/// zero: `1/4 + (3/2) x / (1 + x^2)`.
pub fn sparse_limit_ratio(x: f64) -> f64 {
    0.25 + 1.5 * x / (1.0 + x * x)
}

/// Evaluates the asymptotic class-1 distance formulas. `gamma = 0` routes
/// to the two-component (zero-communication) expressions evaluated at the
/// expected centered-degree power.
pub fn analytic_distances(params: &BlockModelParams) -> Result<AnalyticDistances> {
    params.validate()?;
    let n = params.n as f64;
    let pi = params.effective_pi();
    let d12 = 1.0 / (n * pi * (1.0 - pi));

    if params.gamma == 0.0 {
        // Class 1 is an isolated Erdos-Renyi block of size n1 with rate alpha.
        let m = params.class1_size() as f64;
        let p = params.alpha;
        if p <= 0.0 || m < 2.0 {
            return Err(Error::InvalidParams(
                "gamma = 0 route needs alpha > 0 and a class of size >= 2".into(),
            ));
        }
        // E[sum_i dbar_i^2] = m(m-1)p(1-p) for the block.
        let mean_dbar_sq = (m - 1.0) * p * (1.0 - p);
        let r_hat_sq = mean_dbar_sq / ((m - 1.0) * p).powi(2);
        let r_til_sq = mean_dbar_sq / (4.0 * m * (m - 1.0) * p * p);
        let d11_un = r_hat_sq / m;
        let d11_no = r_til_sq / m;
        return Ok(AnalyticDistances {
            d11_sq_unnorm: d11_un,
            d12_sq_unnorm: d12,
            d11_sq_norm: d11_no,
            d12_sq_norm: d12,
            ratio_d11: d11_no / d11_un,
        });
    }

    if params.is_degenerate() {
        return Err(Error::DegenerateModel);
    }
    let s = population_spectrum_unchecked(params);
    let d = params.densities();
    let (alpha, gamma) = (params.alpha, params.gamma);

    let d11_un = (s.x1 * s.x1 / (s.lambda1 * s.lambda1) + s.x2 * s.x2 / (s.lambda2 * s.lambda2))
        * n
        * pi
        * alpha
        * (1.0 - alpha)
        + (s.y1 * s.y1 / (s.lambda1 * s.lambda1) + s.y2 * s.y2 / (s.lambda2 * s.lambda2))
            * n
            * (1.0 - pi)
            * gamma
            * (1.0 - gamma);

    let nu2sq = s.nu2 * s.nu2;
    let d11_no = (n * pi * alpha * (1.0 - alpha)) / (n.powi(3) * pi * d.mu1 * d.mu1)
        * (0.25 + (1.0 - pi) * gamma / (d.mu1 * nu2sq))
        + (n * (1.0 - pi) * gamma * (1.0 - gamma)) / (n.powi(3) * d.mu1 * d.mu1)
            * (0.25 / pi + pi * alpha / ((1.0 - pi) * d.mu2 * nu2sq));

    let out = AnalyticDistances {
        d11_sq_unnorm: d11_un,
        d12_sq_unnorm: d12,
        d11_sq_norm: d11_no,
        d12_sq_norm: d12,
        ratio_d11: d11_no / d11_un,
    };
    for v in [out.d11_sq_unnorm, out.d11_sq_norm, out.ratio_d11] {
        if !v.is_finite() {
            return Err(Error::InvalidParams(
                "analytic distances diverged; parameters too close to degeneracy".into(),
            ));
        }
    }
    Ok(out)
}

/// Class-2 analogues (`d22`, `d21`) via the class-swap symmetry.
pub fn analytic_distances_class2(params: &BlockModelParams) -> Result<AnalyticDistances> {
    analytic_distances(&params.swapped())
}

/// The degree-weighted guess vector for the second normalized eigenvector:
/// `sqrt(d_i)/E_1` on class 1 and `-sqrt(d_i)/E_2` on class 2. Orthogonal to
/// `<sqrt(d_i)>` by construction; one multiplication by the normalized
/// adjacency turns it into a sharp approximation of the second eigenvector.
pub fn guess_vector_ug0(g: &Graph, labeling: &NodeLabeling) -> Result<Vec<f64>> {
    if labeling.node_count() != g.node_count() {
        return Err(Error::LabelMismatch(format!(
            "labeling covers {} nodes, graph has {}",
            labeling.node_count(),
            g.node_count()
        )));
    }
    if labeling.class_count() != 2 {
        return Err(Error::LabelMismatch(format!(
            "expected 2 classes, got {}",
            labeling.class_count()
        )));
    }
    let mut class_degree = [0.0f64; 2];
    for i in 0..g.node_count() {
        class_degree[labeling.label(i)] += g.degree(i) as f64;
    }
    if class_degree[0] <= 0.0 || class_degree[1] <= 0.0 {
        return Err(Error::Invalid(format!(
            "zero total degree in a class: E1 = {}, E2 = {}",
            class_degree[0], class_degree[1]
        )));
    }
    Ok((0..g.node_count())
        .map(|i| {
            let d = (g.degree(i) as f64).sqrt();
            match labeling.label(i) {
                0 => d / class_degree[0],
                _ => -d / class_degree[1],
            }
        })
        .collect())
}
