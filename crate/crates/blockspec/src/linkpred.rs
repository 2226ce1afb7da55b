//! Blockmodel link prediction with cross-validated cluster count, ROC/AUC
//! evaluation over sampled test nodes, and the Katz path-counting baseline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::{mix_seed, spectral_cluster_with, ClusterAssignment, SpectralOptions};
use crate::eigen::{adjacency_top_eigenvalue, EigenOptions};
use crate::error::{Error, Result};
use crate::graph::{Graph, IdMap};

/// Empirical connection probabilities between clusters, learned by edge
/// counting on a training graph.
#[derive(Debug, Clone)]
pub struct FittedBlockProbabilities {
    pub k: usize,
    pub phat: ndarray::Array2<f64>,
    pub cluster_sizes: Vec<usize>,
    /// Cluster pairs whose pair count was zero (singleton within-cells);
    /// their probability is reported as 0.
    pub undefined_cells: Vec<(usize, usize)>,
}

/// Counts edges between (and within) clusters and divides by the number of
/// node pairs in each cell. Every cluster must be nonempty.
pub fn fit_phat(g_train: &Graph, assignment: &ClusterAssignment) -> Result<FittedBlockProbabilities> {
    let k = assignment.cluster_count();
    if assignment.labels.len() != g_train.node_count() {
        return Err(Error::LabelMismatch(format!(
            "assignment covers {} nodes, graph has {}",
            assignment.labels.len(),
            g_train.node_count()
        )));
    }
    let sizes = assignment.cluster_sizes();
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Invalid(format!("cluster {empty} is empty")));
    }
    let mut edge_counts = ndarray::Array2::<f64>::zeros((k, k));
    for &(u, v) in g_train.edges() {
        let (a, b) = (assignment.labels[u], assignment.labels[v]);
        edge_counts[[a, b]] += 1.0;
        if a != b {
            edge_counts[[b, a]] += 1.0;
        }
    }
    let mut phat = ndarray::Array2::<f64>::zeros((k, k));
    let mut undefined = Vec::new();
    for a in 0..k {
        for b in a..k {
            let pairs = if a == b {
                (sizes[a] * sizes[a].saturating_sub(1) / 2) as f64
            } else {
                (sizes[a] * sizes[b]) as f64
            };
            let p = if pairs > 0.0 {
                edge_counts[[a, b]] / pairs
            } else {
                undefined.push((a, b));
                0.0
            };
            phat[[a, b]] = p;
            phat[[b, a]] = p;
        }
    }
    Ok(FittedBlockProbabilities {
        k,
        phat,
        cluster_sizes: sizes,
        undefined_cells: undefined,
    })
}

/// Linkage probability `phat[label(i)][label(j)]` for each queried pair.
pub fn score_pairs(
    model: &FittedBlockProbabilities,
    assignment: &ClusterAssignment,
    pairs: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let n = assignment.labels.len();
    pairs
        .iter()
        .map(|&(i, j)| {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!("pair ({i},{j}) outside node range {n}")));
            }
            Ok(model.phat[[assignment.labels[i], assignment.labels[j]]])
        })
        .collect()
}

/// Area under the ROC curve in the Mann-Whitney form: the probability a
/// positive outranks a negative, ties counted half. Computed exactly by
/// sorting with midranks.
pub fn auc(scores: &[f64], truth: &[bool]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::Invalid(format!(
            "{} scores vs {} labels",
            scores.len(),
            truth.len()
        )));
    }
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Invalid(format!(
            "AUC needs both classes; got {pos} positives, {neg} negatives"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    // Midranks over tied score groups, 1-based.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if truth[idx] {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Exponentially damped path counts `sum_l theta^l (A^l)_ij`, computed as
/// `((I - theta A)^{-1} - I)_ij` by conjugate-gradient solves against the
/// indicator vectors of the queried source rows.
pub fn katz_scores(g: &Graph, theta: f64, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParams(format!("theta = {theta} must be positive")));
    }
    let lambda1 = adjacency_top_eigenvalue(g, &EigenOptions::default())?;
    if theta * lambda1 >= 1.0 {
        return Err(Error::InvalidParams(format!(
            "theta * lambda1 = {:.6} >= 1; pick theta below {:.6}",
            theta * lambda1,
            1.0 / lambda1
        )));
    }
    let n = g.node_count();
    for &(i, j) in pairs {
        if i >= n || j >= n {
            return Err(Error::Invalid(format!("pair ({i},{j}) outside node range {n}")));
        }
    }
    // Group queries by source row; one linear solve serves all its pairs.
    let mut by_source: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (idx, &(i, _)) in pairs.iter().enumerate() {
        by_source.entry(i).or_default().push(idx);
    }
    let mut out = vec![0.0f64; pairs.len()];
    let mut rhs = vec![0.0f64; n];
    for (&src, idxs) in &by_source {
        rhs.iter_mut().for_each(|x| *x = 0.0);
        rhs[src] = 1.0;
        let x = cg_solve_i_minus_theta_a(g, theta, &rhs)?;
        for &idx in idxs {
            let j = pairs[idx].1;
            out[idx] = x[j] - if j == src { 1.0 } else { 0.0 };
        }
    }
    Ok(out)
}

/// CG for `(I - theta A) x = b`; the operator is symmetric positive
/// definite whenever `theta * lambda1 < 1`.
fn cg_solve_i_minus_theta_a(g: &Graph, theta: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = g.node_count();
    let matvec = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            let mut acc = 0.0;
            for &j in g.neighbors(i) {
                acc += x[j];
            }
            y[i] = x[i] - theta * acc;
        }
    };
    let mut x = vec![0.0f64; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0f64; n];
    let b_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let mut rs = r.iter().map(|v| v * v).sum::<f64>();
    for _ in 0..(20 * n + 100) {
        if rs.sqrt() <= 1e-12 * b_norm {
            return Ok(x);
        }
        matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Eigen("CG lost positive definiteness".into()));
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Eigen("CG did not converge".into()))
}

/// Mode of a link-prediction evaluation: whether pairs already linked in
/// the training graph stay in the evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    LinksIncluded,
    LinksExcluded,
}

#[derive(Debug, Clone)]
pub struct PredictionEval {
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
    pub mode: EvalMode,
}

/// Result of the full temporal protocol for one method: mean AUC of the
/// random runs in both modes, plus the per-run values.
#[derive(Debug, Clone)]
pub struct MethodEval {
    /// Cross-validated cluster count; `None` for the Katz baseline.
    pub k_chosen: Option<usize>,
    pub included: PredictionEval,
    pub excluded: PredictionEval,
    pub per_run: Vec<(f64, f64)>,
}

/// Training/validation/test triple after preprocessing, all on one node
/// universe (ids renumbered by `map`).
#[derive(Debug, Clone)]
pub struct ProtocolData {
    pub train: Graph,
    pub validate: Graph,
    pub test: Graph,
    pub map: IdMap,
}

/// Builds the protocol data: the union of the first `T-2` snapshots is the
/// training graph, degree-1 nodes are peeled from it, the largest connected
/// component is kept, and the last two snapshots are restricted to the
/// surviving nodes (validation = `T-1`, test = `T`).
pub fn prepare_protocol(snapshots: &[Graph]) -> Result<ProtocolData> {
    if snapshots.len() < 3 {
        return Err(Error::Invalid(format!(
            "protocol needs >= 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    let t = snapshots.len();
    let merged = Graph::merge_snapshots(&snapshots[..t - 2])?;
    let (pruned, prune_map) = merged.prune_min_degree(2);
    if pruned.node_count() == 0 {
        return Err(Error::Invalid("degree pruning removed every node".into()));
    }
    let (train, lcc_map) = pruned.largest_connected_component();
    let map = prune_map.compose(&lcc_map);
    let kept: Vec<usize> = (0..train.node_count()).map(|new| map.old_id(new)).collect();
    let (validate, _) = snapshots[t - 2].induced_subgraph(&kept);
    let (test, _) = snapshots[t - 1].induced_subgraph(&kept);
    Ok(ProtocolData {
        train,
        validate,
        test,
        map,
    })
}

/// Knobs of the evaluation protocol; defaults follow the standard recipe
/// (100 sampled test nodes, k grid 10..=100 by 10, five random runs).
#[derive(Debug, Clone)]
pub struct ProtocolOptions {
    pub sample_nodes: usize,
    pub k_grid: Vec<usize>,
    pub runs: usize,
    pub spectral: SpectralOptions,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            sample_nodes: 100,
            k_grid: (1..=10).map(|i| i * 10).collect(),
            runs: 5,
            spectral: SpectralOptions::default(),
        }
    }
}

const SALT_CV_NODES: u64 = 0xC0DE;
const SALT_RUN_NODES: u64 = 0x0DE5;
const SALT_FIT: u64 = 0xF17;

/// Sampled evaluation pairs: for every sampled source node, all partners.
struct EvalPairs {
    pairs: Vec<(usize, usize)>,
    truth: Vec<bool>,
}

/// Samples `count` nodes (without replacement, seeded) among nodes with at
/// least one edge in `eval_graph`, then lists every partner pair.
fn sample_eval_pairs(eval_graph: &Graph, count: usize, seed: u64) -> Result<EvalPairs> {
    let eligible: Vec<usize> = (0..eval_graph.node_count())
        .filter(|&i| eval_graph.degree(i) > 0)
        .collect();
    if eligible.is_empty() {
        return Err(Error::Invalid("no nodes with edges in the evaluation graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = count.min(eligible.len());
    let picked = rand::seq::index::sample(&mut rng, eligible.len(), amount);
    let mut sources: Vec<usize> = picked.iter().map(|i| eligible[i]).collect();
    sources.sort_unstable();
    let n = eval_graph.node_count();
    let mut pairs = Vec::with_capacity(sources.len() * (n - 1));
    let mut truth = Vec::with_capacity(sources.len() * (n - 1));
    for &s in &sources {
        for j in 0..n {
            if j == s {
                continue;
            }
            pairs.push((s, j));
            truth.push(eval_graph.has_edge(s, j));
        }
    }
    Ok(EvalPairs { pairs, truth })
}

fn eval_both_modes(
    train: &Graph,
    scores: &[f64],
    ep: &EvalPairs,
) -> Result<(PredictionEval, PredictionEval)> {
    let inc_auc = auc(scores, &ep.truth)?;
    let pos = ep.truth.iter().filter(|&&t| t).count();
    let included = PredictionEval {
        auc: inc_auc,
        positives: pos,
        negatives: ep.truth.len() - pos,
        mode: EvalMode::LinksIncluded,
    };
    let mut ex_scores = Vec::new();
    let mut ex_truth = Vec::new();
    for (idx, &(i, j)) in ep.pairs.iter().enumerate() {
        if !train.has_edge(i, j) {
            ex_scores.push(scores[idx]);
            ex_truth.push(ep.truth[idx]);
        }
    }
    let ex_auc = auc(&ex_scores, &ex_truth)?;
    let ex_pos = ex_truth.iter().filter(|&&t| t).count();
    let excluded = PredictionEval {
        auc: ex_auc,
        positives: ex_pos,
        negatives: ex_truth.len() - ex_pos,
        mode: EvalMode::LinksExcluded,
    };
    Ok((included, excluded))
}

/// Picks the cluster count with the best validation AUC (ties go to the
/// smaller k). The validation evaluation reuses the test recipe: sampled
/// nodes with at least one validation edge, all partners scored.
pub fn cross_validate_k(
    train: &Graph,
    validate: &Graph,
    k_grid: &[usize],
    normalized: bool,
    seed: u64,
    opts: &ProtocolOptions,
) -> Result<usize> {
    if k_grid.is_empty() {
        return Err(Error::Invalid("empty k grid".into()));
    }
    if validate.node_count() != train.node_count() {
        return Err(Error::SnapshotMismatch(
            train.node_count(),
            validate.node_count(),
        ));
    }
    let grid: Vec<usize> = {
        let mut g: Vec<usize> = k_grid
            .iter()
            .map(|&k| k.min(train.node_count().saturating_sub(1)).max(1))
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    let ep = sample_eval_pairs(validate, opts.sample_nodes, mix_seed(seed, SALT_CV_NODES))?;
    let mut best: Option<(usize, f64)> = None;
    for &k in &grid {
        let (assignment, _) =
            spectral_cluster_with(train, k, normalized, mix_seed(seed, SALT_FIT ^ k as u64), &opts.spectral)?;
        let model = fit_phat(train, &assignment)?;
        let scores = score_pairs(&model, &assignment, &ep.pairs)?;
        let a = auc(&scores, &ep.truth)?;
        match best {
            Some((_, best_auc)) if a <= best_auc => {}
            _ => best = Some((k, a)),
        }
    }
    Ok(best.expect("nonempty grid").0)
}

/// Full temporal protocol for the blockmodel method: cross-validate k on
/// the validation snapshot, then average the test AUC over `opts.runs`
/// seeded runs (run seed = seed xor run index) in both evaluation modes.
pub fn evaluate_protocol(
    snapshots: &[Graph],
    normalized: bool,
    seed: u64,
    opts: &ProtocolOptions,
) -> Result<MethodEval> {
    let data = prepare_protocol(snapshots)?;
    evaluate_blockmodel(&data, normalized, seed, opts)
}

/// Blockmodel evaluation on prepared protocol data.
pub fn evaluate_blockmodel(
    data: &ProtocolData,
    normalized: bool,
    seed: u64,
    opts: &ProtocolOptions,
) -> Result<MethodEval> {
    let k = cross_validate_k(&data.train, &data.validate, &opts.k_grid, normalized, seed, opts)?;
    let mut per_run = Vec::with_capacity(opts.runs);
    let mut acc = (0.0, 0.0);
    let mut last: Option<(PredictionEval, PredictionEval)> = None;
    for run in 0..opts.runs.max(1) {
        let run_seed = seed ^ run as u64;
        let (assignment, _) = spectral_cluster_with(
            &data.train,
            k,
            normalized,
            mix_seed(run_seed, SALT_FIT),
            &opts.spectral,
        )?;
        let model = fit_phat(&data.train, &assignment)?;
        let ep = sample_eval_pairs(&data.test, opts.sample_nodes, mix_seed(run_seed, SALT_RUN_NODES))?;
        let scores = score_pairs(&model, &assignment, &ep.pairs)?;
        let (inc, exc) = eval_both_modes(&data.train, &scores, &ep)?;
        per_run.push((inc.auc, exc.auc));
        acc.0 += inc.auc;
        acc.1 += exc.auc;
        last = Some((inc, exc));
    }
    let (inc_last, exc_last) = last.expect("at least one run");
    let runs = per_run.len() as f64;
    Ok(MethodEval {
        k_chosen: Some(k),
        included: PredictionEval {
            auc: acc.0 / runs,
            ..inc_last
        },
        excluded: PredictionEval {
            auc: acc.1 / runs,
            ..exc_last
        },
        per_run,
    })
}

/// Katz baseline on prepared protocol data; `theta = None` uses the
/// default `0.8 / lambda1(train)`. Runs share the node sampling with the
/// blockmodel evaluation for the same seed.
pub fn evaluate_katz(
    data: &ProtocolData,
    theta: Option<f64>,
    seed: u64,
    opts: &ProtocolOptions,
) -> Result<MethodEval> {
    let lambda1 = adjacency_top_eigenvalue(&data.train, &EigenOptions::default())?;
    if lambda1 <= 0.0 {
        return Err(Error::Invalid("training graph has no edges".into()));
    }
    let theta = theta.unwrap_or(0.8 / lambda1);
    let mut per_run = Vec::with_capacity(opts.runs);
    let mut acc = (0.0, 0.0);
    let mut last: Option<(PredictionEval, PredictionEval)> = None;
    for run in 0..opts.runs.max(1) {
        let run_seed = seed ^ run as u64;
        let ep = sample_eval_pairs(&data.test, opts.sample_nodes, mix_seed(run_seed, SALT_RUN_NODES))?;
        let scores = katz_scores(&data.train, theta, &ep.pairs)?;
        let (inc, exc) = eval_both_modes(&data.train, &scores, &ep)?;
        per_run.push((inc.auc, exc.auc));
        acc.0 += inc.auc;
        acc.1 += exc.auc;
        last = Some((inc, exc));
    }
    let (inc_last, exc_last) = last.expect("at least one run");
    let runs = per_run.len() as f64;
    Ok(MethodEval {
        k_chosen: None,
        included: PredictionEval {
            auc: acc.0 / runs,
            ..inc_last
        },
        excluded: PredictionEval {
            auc: acc.1 / runs,
            ..exc_last
        },
        per_run,
    })
}
