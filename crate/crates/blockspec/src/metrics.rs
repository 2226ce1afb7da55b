//! Oracle-based quality metrics for spectral embeddings, residual
//! decompositions of eigenvectors, misclassification rates, and the
//! empirical-vs-analytic comparison harness.

use std::io::Write;

use ndarray::{Array2, ArrayView2};

use crate::clustering::{spectral_embedding, SpectralEmbedding, SpectralOptions};
use crate::eigen::{dot, norm, top_k_eigenpairs, AdjacencyOp, EigenOptions};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabeling};
use crate::sbm::{analytic_distances, population_spectrum_unchecked, sample, BlockModelParams};

/// The four mean-squared distances of embedded points from the oracle
/// (true-label) class centers, plus the centers themselves.
#[derive(Debug, Clone)]
pub struct QualityMetrics {
    pub d11_sq: f64,
    pub d12_sq: f64,
    pub d21_sq: f64,
    pub d22_sq: f64,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub center_gap_sq: f64,
}

/// Mean squared distances of class-c rows from the oracle centers of both
/// classes. The truth must have exactly two nonempty classes and the
/// embedding exactly two columns.
pub fn quality_metrics(embedding: &SpectralEmbedding, truth: &NodeLabeling) -> Result<QualityMetrics> {
    quality_metrics_points(embedding.coords.view(), truth)
}

/// Same metric on raw points; the identity `d12^2 = d11^2 + ||K1 - K2||^2`
/// holds exactly for mean centers, whatever the points are.
pub fn quality_metrics_points(points: ArrayView2<f64>, truth: &NodeLabeling) -> Result<QualityMetrics> {
    if truth.class_count() != 2 {
        return Err(Error::LabelMismatch(format!(
            "quality metrics are defined for 2 classes, got {}",
            truth.class_count()
        )));
    }
    if truth.class_sizes()[0] == 0 || truth.class_sizes()[1] == 0 {
        return Err(Error::LabelMismatch("both classes must be nonempty".into()));
    }
    if points.nrows() != truth.node_count() {
        return Err(Error::LabelMismatch(format!(
            "{} embedded rows vs {} labeled nodes",
            points.nrows(),
            truth.node_count()
        )));
    }
    if points.ncols() != 2 {
        return Err(Error::Invalid(format!(
            "expected a 2-column embedding, got {}",
            points.ncols()
        )));
    }
    let dim = points.ncols();
    let mut centers = [vec![0.0; dim], vec![0.0; dim]];
    for i in 0..points.nrows() {
        let c = truth.label(i);
        for j in 0..dim {
            centers[c][j] += points[[i, j]];
        }
    }
    for (c, center) in centers.iter_mut().enumerate() {
        for v in center.iter_mut() {
            *v /= truth.class_sizes()[c] as f64;
        }
    }
    let mut sums = [[0.0f64; 2]; 2]; // [class][center]
    for i in 0..points.nrows() {
        let c = truth.label(i);
        for (l, center) in centers.iter().enumerate() {
            let mut d = 0.0;
            for j in 0..dim {
                let diff = points[[i, j]] - center[j];
                d += diff * diff;
            }
            sums[c][l] += d;
        }
    }
    let sizes = truth.class_sizes();
    let gap: f64 = centers[0]
        .iter()
        .zip(&centers[1])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(QualityMetrics {
        d11_sq: sums[0][0] / sizes[0] as f64,
        d12_sq: sums[0][1] / sizes[0] as f64,
        d21_sq: sums[1][0] / sizes[1] as f64,
        d22_sq: sums[1][1] / sizes[1] as f64,
        k1: centers[0].clone(),
        k2: centers[1].clone(),
        center_gap_sq: gap,
    })
}

/// Orthogonal split of a population eigenvector along its empirical
/// counterpart: `v = c vhat + r` with the sign of `vhat` chosen so `c >= 0`.
#[derive(Debug, Clone)]
pub struct ResidualDecomposition {
    pub c: f64,
    pub r: Vec<f64>,
    pub r_norm_sq: f64,
    /// Mean of `r` restricted to each class.
    pub r_class_means: Vec<f64>,
}

pub fn residual_decomposition(
    population: &[f64],
    empirical: &[f64],
    truth: &NodeLabeling,
) -> Result<ResidualDecomposition> {
    if population.len() != empirical.len() || population.len() != truth.node_count() {
        return Err(Error::LabelMismatch(format!(
            "length mismatch: population {}, empirical {}, labels {}",
            population.len(),
            empirical.len(),
            truth.node_count()
        )));
    }
    for (name, v) in [("population", population), ("empirical", empirical)] {
        let n = norm(v);
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::Invalid(format!("{name} vector has norm {n}, want 1")));
        }
    }
    let raw = dot(population, empirical);
    let sign = if raw < 0.0 { -1.0 } else { 1.0 };
    let c = raw * sign;
    let r: Vec<f64> = population
        .iter()
        .zip(empirical)
        .map(|(&v, &vh)| v - c * sign * vh)
        .collect();
    let r_norm_sq = dot(&r, &r);
    let mut means = vec![0.0f64; truth.class_count()];
    for (i, &ri) in r.iter().enumerate() {
        means[truth.label(i)] += ri;
    }
    for (m, &s) in means.iter_mut().zip(truth.class_sizes()) {
        *m /= s.max(1) as f64;
    }
    Ok(ResidualDecomposition {
        c,
        r,
        r_norm_sq,
        r_class_means: means,
    })
}

/// Plain inner product; reported alongside residuals when the off-diagonal
/// alignments `c_12`, `c_21` are wanted.
pub fn cross_alignment(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b)
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm in the potentials form). Returns the column matched to each
/// row.
fn hungarian_min_assignment(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // row matched to column j, 1-based
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if matched[j] > 0 {
            row_to_col[matched[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Fraction of disagreeing nodes minimized over relabelings of the
/// predicted classes (both swaps for two classes, Hungarian assignment on
/// the confusion matrix otherwise).
pub fn misclassification_rate(predicted: &NodeLabeling, truth: &NodeLabeling) -> Result<f64> {
    if predicted.node_count() != truth.node_count() {
        return Err(Error::LabelMismatch(format!(
            "{} predicted nodes vs {} truth nodes",
            predicted.node_count(),
            truth.node_count()
        )));
    }
    let n = truth.node_count();
    if n == 0 {
        return Err(Error::LabelMismatch("empty labelings".into()));
    }
    let k = predicted.class_count().max(truth.class_count());
    let mut confusion = Array2::<f64>::zeros((k, k));
    for i in 0..n {
        confusion[[predicted.label(i), truth.label(i)]] += 1.0;
    }
    let agree = if k == 2 {
        let direct = confusion[[0, 0]] + confusion[[1, 1]];
        let swapped = confusion[[0, 1]] + confusion[[1, 0]];
        direct.max(swapped)
    } else {
        let max_entry = confusion.iter().cloned().fold(0.0f64, f64::max);
        let cost = confusion.mapv(|c| max_entry - c);
        let assign = hungarian_min_assignment(&cost);
        assign
            .iter()
            .enumerate()
            .map(|(p, &t)| confusion[[p, t]])
            .sum()
    };
    Ok((n as f64 - agree) / n as f64)
}

/// Deviation of the two leading empirical adjacency eigenvalues from their
/// closed-form population counterparts, raw and scaled by `sqrt(n rho)`.
#[derive(Debug, Clone)]
pub struct EigDeviationReport {
    pub empirical: [f64; 2],
    pub population: [f64; 2],
    pub deviation: [f64; 2],
    pub deviation_over_sqrt_nrho: [f64; 2],
    pub rho: f64,
    /// Set when `alpha beta = gamma^2`; the second population pair is then
    /// meaningless and the report is diagnostic only.
    pub degenerate_warning: bool,
}

pub fn eigenvalue_deviation(
    g: &Graph,
    params: &BlockModelParams,
    eigen_opts: &EigenOptions,
) -> Result<EigDeviationReport> {
    params.validate()?;
    if g.node_count() != params.n {
        return Err(Error::Invalid(format!(
            "graph has {} nodes, params say {}",
            g.node_count(),
            params.n
        )));
    }
    let op = AdjacencyOp::new(g);
    let pairs = top_k_eigenpairs(&op, 2, eigen_opts)?;
    let s = population_spectrum_unchecked(params);
    let rho = params.rho();
    let scale = (params.n as f64 * rho).sqrt();
    let emp = [pairs.values[0], pairs.values[1]];
    let pop = [s.lambda1, s.lambda2];
    let dev = [emp[0] - pop[0], emp[1] - pop[1]];
    Ok(EigDeviationReport {
        empirical: emp,
        population: pop,
        deviation: dev,
        deviation_over_sqrt_nrho: [dev[0] / scale, dev[1] / scale],
        rho,
        degenerate_warning: params.is_degenerate(),
    })
}

/// One replicate of the empirical-to-analytic comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub replicate: usize,
    pub seed: u64,
    pub d11_sq_unnorm: f64,
    pub d11_sq_norm: f64,
    pub d12_sq_unnorm: f64,
    pub d12_sq_norm: f64,
    pub emp_ratio_d11: f64,
    pub emp_ratio_d12: f64,
    pub analytic_ratio_d11: f64,
    pub analytic_ratio_d12: f64,
    pub rel_err_d11: f64,
    pub rel_err_d12: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Mean / median / max of the absolute relative errors over replicates.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonSummary {
    pub mean_d11: f64,
    pub median_d11: f64,
    pub max_d11: f64,
    pub mean_d12: f64,
    pub median_d12: f64,
    pub max_d12: f64,
}

pub(crate) fn median(values: &mut Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

impl ComparisonTable {
    pub fn summary(&self) -> ComparisonSummary {
        let mut e11: Vec<f64> = self.rows.iter().map(|r| r.rel_err_d11).collect();
        let mut e12: Vec<f64> = self.rows.iter().map(|r| r.rel_err_d12).collect();
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len().max(1) as f64;
        let max = |v: &Vec<f64>| v.iter().cloned().fold(0.0f64, f64::max);
        ComparisonSummary {
            mean_d11: mean(&e11),
            max_d11: max(&e11),
            mean_d12: mean(&e12),
            max_d12: max(&e12),
            median_d11: median(&mut e11),
            median_d12: median(&mut e12),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "replicate,seed,d11_sq_unnorm,d11_sq_norm,d12_sq_unnorm,d12_sq_norm,\
             emp_ratio_d11,emp_ratio_d12,analytic_ratio_d11,analytic_ratio_d12,\
             rel_err_d11,rel_err_d12"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.replicate,
                r.seed,
                r.d11_sq_unnorm,
                r.d11_sq_norm,
                r.d12_sq_unnorm,
                r.d12_sq_norm,
                r.emp_ratio_d11,
                r.emp_ratio_d12,
                r.analytic_ratio_d11,
                r.analytic_ratio_d12,
                r.rel_err_d11,
                r.rel_err_d12
            )?;
        }
        Ok(())
    }
}

/// Samples `replicates` graphs (seed xor replicate index), runs both
/// spectral embeddings, and compares the measured distance ratios with the
/// closed-form predictions.
pub fn empirical_vs_analytic(
    params: &BlockModelParams,
    seed: u64,
    replicates: usize,
) -> Result<ComparisonTable> {
    empirical_vs_analytic_with(params, seed, replicates, &SpectralOptions::default())
}

pub fn empirical_vs_analytic_with(
    params: &BlockModelParams,
    seed: u64,
    replicates: usize,
    opts: &SpectralOptions,
) -> Result<ComparisonTable> {
    if replicates == 0 {
        return Err(Error::Invalid("replicates must be >= 1".into()));
    }
    let analytic = analytic_distances(params)?;
    let analytic_ratio_d12 = analytic.d12_sq_norm / analytic.d12_sq_unnorm;
    let mut rows = Vec::with_capacity(replicates);
    for rep in 0..replicates {
        let rep_seed = seed ^ rep as u64;
        let (g, truth) = sample(params, rep_seed)?;
        let emb_hat = spectral_embedding(&g, 2, false, rep_seed, opts)?;
        let emb_til = spectral_embedding(&g, 2, true, rep_seed, opts)?;
        let qm_hat = quality_metrics(&emb_hat, &truth)?;
        let qm_til = quality_metrics(&emb_til, &truth)?;
        let emp_ratio_d11 = qm_til.d11_sq / qm_hat.d11_sq;
        let emp_ratio_d12 = qm_til.d12_sq / qm_hat.d12_sq;
        rows.push(ComparisonRow {
            replicate: rep,
            seed: rep_seed,
            d11_sq_unnorm: qm_hat.d11_sq,
            d11_sq_norm: qm_til.d11_sq,
            d12_sq_unnorm: qm_hat.d12_sq,
            d12_sq_norm: qm_til.d12_sq,
            emp_ratio_d11,
            emp_ratio_d12,
            analytic_ratio_d11: analytic.ratio_d11,
            analytic_ratio_d12,
            rel_err_d11: (emp_ratio_d11 / analytic.ratio_d11 - 1.0).abs(),
            rel_err_d12: (emp_ratio_d12 / analytic_ratio_d12 - 1.0).abs(),
        });
    }
    Ok(ComparisonTable { rows })
}
