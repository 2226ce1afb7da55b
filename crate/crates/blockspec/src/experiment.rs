//! Seeded, configuration-driven experiment runners. Each runner consumes a
//! typed config, executes a deterministic grid of replicates, and renders
//! long-format CSV that can be regenerated bit-identically from
//! `(config, seed)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::clustering::{
    kmeans_from_centers, mix_seed, orthogonal_procrustes, spectral_cluster_with,
    spectral_embedding, SpectralOptions,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabeling};
use crate::linkpred::{self, ProtocolOptions};
use crate::metrics::{
    self, empirical_vs_analytic_with, median, misclassification_rate, quality_metrics,
};
use crate::sbm::{analytic_distances, sample, sparse_limit_ratio, BlockModelParams};

/// Flat `key=value` configuration text: `#` comments, blank lines ignored,
/// later keys override earlier ones. Lookups carry the line number into
/// error messages.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<KvConfig> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected key=value, got {t:?}"),
            })?;
            entries.insert(k.trim().to_string(), (line, v.trim().to_string()));
        }
        Ok(KvConfig { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().map(|(k, (line, _))| (k.as_str(), *line))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn parse_at<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                msg: format!("field {key}: cannot parse {v:?}"),
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_at(key)
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_at(key)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_at(key)
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.parse_at(key)
    }

    /// Comma-separated values; a `lo:hi:step` token expands to an inclusive
    /// range.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((line, raw)) = self.entries.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for tok in raw.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            if tok.contains(':') {
                let parts: Vec<&str> = tok.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("field {key}: range must be lo:hi:step, got {tok:?}"),
                    });
                }
                let lo: f64 = parts[0].parse().map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("field {key}: bad range start {:?}", parts[0]),
                })?;
                let hi: f64 = parts[1].parse().map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("field {key}: bad range end {:?}", parts[1]),
                })?;
                let step: f64 = parts[2].parse().map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("field {key}: bad range step {:?}", parts[2]),
                })?;
                if !(step > 0.0) || hi < lo {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("field {key}: empty or inverted range {tok:?}"),
                    });
                }
                let count = ((hi - lo) / step + 1.5).floor() as usize;
                for i in 0..count {
                    let v = lo + step * i as f64;
                    if v <= hi + 1e-12 {
                        out.push(v);
                    }
                }
            } else {
                out.push(tok.parse().map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("field {key}: cannot parse {tok:?}"),
                })?);
            }
        }
        Ok(Some(out))
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        let Some(vals) = self.get_f64_list(key)? else {
            return Ok(None);
        };
        let (line, _) = self.entries.get(key).expect("key exists");
        vals.into_iter()
            .map(|v| {
                if v.fract() == 0.0 && v >= 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Parse {
                        line: *line,
                        msg: format!("field {key}: {v} is not a nonnegative integer"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Rejects keys outside the allowed set; the diagnostic names the line.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (k, line) in self.keys() {
            if !allowed.contains(&k) {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown field {k:?} (allowed: {})", allowed.join(", ")),
                });
            }
        }
        Ok(())
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------------
// ratio-surface
// ---------------------------------------------------------------------------

/// Grid scan of the analytic normalized/unnormalized variance ratio for the
/// equal-class `beta = alpha` model, against the closed-form sparse limit.
#[derive(Debug, Clone)]
pub struct RatioSurfaceConfig {
    pub n: usize,
    pub pi: f64,
    pub alphas: Vec<f64>,
    /// Cross-class probabilities; each row reports `x = gamma / alpha`.
    pub gammas: Option<Vec<f64>>,
    /// Alternative grid directly over `x = gamma / alpha`.
    pub xs: Option<Vec<f64>>,
}

impl Default for RatioSurfaceConfig {
    fn default() -> Self {
        RatioSurfaceConfig {
            n: 1_000_000,
            pi: 0.5,
            alphas: (1..=100).map(|i| i as f64 / 100.0).collect(),
            gammas: Some((1..=100).map(|i| i as f64 / 100.0).collect()),
            xs: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatioSurfaceRow {
    pub alpha: f64,
    pub gamma: f64,
    pub x: f64,
    pub sparse_limit: f64,
    pub dense_ratio: f64,
    pub skipped: bool,
}

pub fn ratio_surface(cfg: &RatioSurfaceConfig) -> Result<Vec<RatioSurfaceRow>> {
    if cfg.alphas.is_empty() {
        return Err(Error::InvalidParams("ratio-surface: empty alpha grid".into()));
    }
    let gammas_of = |alpha: f64| -> Vec<f64> {
        match (&cfg.gammas, &cfg.xs) {
            (Some(gs), _) => gs.clone(),
            (None, Some(xs)) => xs.iter().map(|x| x * alpha).collect(),
            (None, None) => Vec::new(),
        }
    };
    if gammas_of(cfg.alphas[0]).is_empty() {
        return Err(Error::InvalidParams(
            "ratio-surface: provide a gamma or x grid".into(),
        ));
    }
    let mut rows = Vec::new();
    for &alpha in &cfg.alphas {
        for gamma in gammas_of(alpha) {
            let x = gamma / alpha;
            let sparse_limit = sparse_limit_ratio(x);
            let params = BlockModelParams::new(cfg.n, cfg.pi, alpha, alpha, gamma);
            let (dense_ratio, skipped) = match params {
                Ok(p) if !p.is_degenerate() && gamma > 0.0 => match analytic_distances(&p) {
                    Ok(a) => (a.ratio_d11, false),
                    Err(_) => (f64::NAN, true),
                },
                _ => (f64::NAN, true),
            };
            rows.push(RatioSurfaceRow {
                alpha,
                gamma,
                x,
                sparse_limit,
                dense_ratio,
                skipped,
            });
        }
    }
    Ok(rows)
}

pub fn ratio_surface_csv(cfg: &RatioSurfaceConfig) -> Result<String> {
    let rows = ratio_surface(cfg)?;
    let mut out = String::new();
    out.push_str("# schema=ratio_surface.v1\n");
    out.push_str("alpha,gamma,x,sparse_limit_ratio,dense_ratio,skipped\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.gamma),
            fmt_f64(r.x),
            fmt_f64(r.sparse_limit),
            fmt_f64(r.dense_ratio),
            r.skipped as u8
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// misclassification sweeps
// ---------------------------------------------------------------------------

/// Train/test misclassification sweep over either a (alpha, gamma/alpha)
/// grid at fixed n or an n grid at fixed rates.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub cells: Vec<SweepCell>,
    pub pi: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Largest-component filter: both sampled graphs must keep at least
    /// this fraction of nodes in one component or the replicate is skipped.
    pub giant_min_fraction: f64,
    pub spectral: SpectralOptions,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepCell {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SweepConfig {
    /// Grid over within-class rate and `x = gamma/alpha` at fixed size,
    /// with `beta = alpha`.
    pub fn gamma_alpha(n: usize, alphas: &[f64], xs: &[f64], pi: f64, replicates: usize, seed: u64) -> SweepConfig {
        let mut cells = Vec::new();
        for &a in alphas {
            for &x in xs {
                cells.push(SweepCell {
                    n,
                    alpha: a,
                    beta: a,
                    gamma: a * x,
                });
            }
        }
        SweepConfig {
            cells,
            pi,
            replicates,
            seed,
            giant_min_fraction: 0.95,
            spectral: SpectralOptions::default(),
        }
    }

    /// Grid over graph size at fixed rates.
    pub fn n_grid(ns: &[usize], alpha: f64, beta: f64, gamma: f64, pi: f64, replicates: usize, seed: u64) -> SweepConfig {
        let cells = ns
            .iter()
            .map(|&n| SweepCell {
                n,
                alpha,
                beta,
                gamma,
            })
            .collect();
        SweepConfig {
            cells,
            pi,
            replicates,
            seed,
            giant_min_fraction: 0.95,
            spectral: SpectralOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub cell: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
    pub normalized: bool,
    pub misclassification: f64,
    pub train_giant_fraction: f64,
    pub test_giant_fraction: f64,
    pub skipped: bool,
    pub seed: u64,
}

const SALT_TRAIN: u64 = 0x7121;
const SALT_TEST: u64 = 0x7e57;
const SALT_FIT_N: u64 = 0xF170;
const SALT_FIT_U: u64 = 0xF171;

/// Outcome of one train/test transfer.
#[derive(Debug, Clone, Copy)]
pub struct TransferOutcome {
    pub misclassification: f64,
    pub train_giant_fraction: f64,
    pub test_giant_fraction: f64,
}

/// Fits spectral clustering on the training graph's giant component,
/// re-embeds the test graph, aligns the two embeddings by an orthogonal
/// Procrustes rotation on the shared nodes, runs Lloyd from the training
/// centers, and scores against the truth on the test component. Returns
/// `None` when either graph fails the giant-component filter.
pub fn train_test_misclassification(
    train: &Graph,
    test: &Graph,
    truth: &NodeLabeling,
    k: usize,
    normalized: bool,
    fit_seed: u64,
    giant_min_fraction: f64,
    opts: &SpectralOptions,
) -> Result<Option<TransferOutcome>> {
    let train_frac = train.largest_component_fraction();
    let test_frac = test.largest_component_fraction();
    if train_frac < giant_min_fraction || test_frac < giant_min_fraction {
        return Ok(None);
    }
    let (train_lcc, train_map) = train.largest_connected_component();
    let (test_lcc, test_map) = test.largest_connected_component();
    if train_lcc.node_count() < 2 * k || test_lcc.node_count() < 2 * k {
        return Ok(None);
    }
    let (fit, train_emb) = spectral_cluster_with(&train_lcc, k, normalized, fit_seed, opts)?;
    let test_emb = spectral_embedding(&test_lcc, k, normalized, fit_seed, opts)?;

    // Shared nodes, in original-id order, as row indices on both sides.
    let mut tr_rows = Vec::new();
    let mut te_rows = Vec::new();
    for old in 0..truth.node_count() {
        if let (Some(a), Some(b)) = (train_map.new_id(old), test_map.new_id(old)) {
            tr_rows.push(a);
            te_rows.push(b);
        }
    }
    if tr_rows.len() < k {
        return Ok(None);
    }
    let take = |m: &ndarray::Array2<f64>, rows: &[usize]| {
        let mut out = ndarray::Array2::zeros((rows.len(), m.ncols()));
        for (r, &i) in rows.iter().enumerate() {
            out.row_mut(r).assign(&m.row(i));
        }
        out
    };
    let a = take(&test_emb.coords, &te_rows);
    let b = take(&train_emb.coords, &tr_rows);
    let rotation = orthogonal_procrustes(a.view(), b.view())?;
    let aligned = test_emb.coords.dot(&rotation);
    let transferred = kmeans_from_centers(aligned.view(), fit.centers.view(), opts.max_iters)?;
    let predicted = NodeLabeling::with_classes(transferred.labels.clone(), k);
    let truth_on_test = truth.restrict(&test_map);
    let mis = misclassification_rate(&predicted, &truth_on_test)?;
    Ok(Some(TransferOutcome {
        misclassification: mis,
        train_giant_fraction: train_frac,
        test_giant_fraction: test_frac,
    }))
}

pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.cells.is_empty() || cfg.replicates == 0 {
        return Err(Error::InvalidParams("sweep: empty grid or zero replicates".into()));
    }
    let work: Vec<(usize, usize)> = (0..cfg.cells.len())
        .flat_map(|c| (0..cfg.replicates).map(move |r| (c, r)))
        .collect();
    let mut rows: Vec<SweepRow> = work
        .par_iter()
        .map(|&(c, r)| -> Result<Vec<SweepRow>> {
            let cell = cfg.cells[c];
            let params = BlockModelParams::new(cell.n, cfg.pi, cell.alpha, cell.beta, cell.gamma)?;
            let base = mix_seed(cfg.seed, c as u64) ^ r as u64;
            let train_seed = mix_seed(base, SALT_TRAIN);
            let test_seed = mix_seed(base, SALT_TEST);
            let (train, truth) = sample(&params, train_seed)?;
            let (test, _) = sample(&params, test_seed)?;
            let mut out = Vec::with_capacity(2);
            for normalized in [false, true] {
                let fit_seed = mix_seed(base, if normalized { SALT_FIT_N } else { SALT_FIT_U });
                let outcome = train_test_misclassification(
                    &train,
                    &test,
                    &truth,
                    2,
                    normalized,
                    fit_seed,
                    cfg.giant_min_fraction,
                    &cfg.spectral,
                )?;
                let (mis, tf, sf, skipped) = match outcome {
                    Some(o) => (
                        o.misclassification,
                        o.train_giant_fraction,
                        o.test_giant_fraction,
                        false,
                    ),
                    None => (
                        f64::NAN,
                        train.largest_component_fraction(),
                        test.largest_component_fraction(),
                        true,
                    ),
                };
                out.push(SweepRow {
                    cell: c,
                    n: cell.n,
                    alpha: cell.alpha,
                    beta: cell.beta,
                    gamma: cell.gamma,
                    replicate: r,
                    normalized,
                    misclassification: mis,
                    train_giant_fraction: tf,
                    test_giant_fraction: sf,
                    skipped,
                    seed: base,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<SweepRow>>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by_key(|r| (r.cell, r.replicate, r.normalized));
    Ok(rows)
}

pub fn sweep_csv(cfg: &SweepConfig) -> Result<String> {
    let rows = sweep(cfg)?;
    let mut out = String::new();
    out.push_str("# schema=sweep.v1\n");
    out.push_str(
        "cell,n,alpha,beta,gamma,replicate,method,misclassification,\
         train_giant_fraction,test_giant_fraction,skipped,seed\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell,
            r.n,
            fmt_f64(r.alpha),
            fmt_f64(r.beta),
            fmt_f64(r.gamma),
            r.replicate,
            if r.normalized { "normalized" } else { "unnormalized" },
            fmt_f64(r.misclassification),
            fmt_f64(r.train_giant_fraction),
            fmt_f64(r.test_giant_fraction),
            r.skipped as u8,
            r.seed
        );
    }
    Ok(out)
}

/// Mean misclassification per (cell, method) over the non-skipped
/// replicates; NaN when everything was skipped.
pub fn sweep_cell_means(rows: &[SweepRow]) -> BTreeMap<(usize, bool), f64> {
    let mut acc: BTreeMap<(usize, bool), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry((r.cell, r.normalized)).or_insert((0.0, 0));
        if !r.skipped {
            e.0 += r.misclassification;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (s, c))| (k, if c > 0 { s / c as f64 } else { f64::NAN }))
        .collect()
}

// ---------------------------------------------------------------------------
// zero-communication ratio experiment
// ---------------------------------------------------------------------------

/// Within-class variance and bias ratios between the unnormalized and
/// normalized pipelines on disconnected (`gamma = 0`) models.
#[derive(Debug, Clone)]
pub struct ZeroCommConfig {
    pub n: usize,
    pub pi: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub spectral: SpectralOptions,
}

impl Default for ZeroCommConfig {
    fn default() -> Self {
        ZeroCommConfig {
            n: 2000,
            pi: 0.5,
            alpha: 0.02,
            gamma: 0.0,
            replicates: 20,
            seed: 0,
            spectral: SpectralOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroCommRow {
    pub replicate: usize,
    pub seed: u64,
    pub d11_hat_over_tilde: f64,
    pub d12_hat_over_tilde: f64,
    pub d11_tilde_over_hat: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroCommSummary {
    pub median_d11_hat_over_tilde: f64,
    pub median_d12_hat_over_tilde: f64,
    pub median_d11_tilde_over_hat: f64,
}

pub fn zero_comm(cfg: &ZeroCommConfig) -> Result<(Vec<ZeroCommRow>, ZeroCommSummary)> {
    let params = BlockModelParams::new(cfg.n, cfg.pi, cfg.alpha, cfg.alpha, cfg.gamma)?;
    let rows: Vec<ZeroCommRow> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| -> Result<ZeroCommRow> {
            let rep_seed = cfg.seed ^ rep as u64;
            let (g, truth) = sample(&params, rep_seed)?;
            let emb_hat = spectral_embedding(&g, 2, false, rep_seed, &cfg.spectral)?;
            let emb_til = spectral_embedding(&g, 2, true, rep_seed, &cfg.spectral)?;
            let qm_hat = quality_metrics(&emb_hat, &truth)?;
            let qm_til = quality_metrics(&emb_til, &truth)?;
            Ok(ZeroCommRow {
                replicate: rep,
                seed: rep_seed,
                d11_hat_over_tilde: qm_hat.d11_sq / qm_til.d11_sq,
                d12_hat_over_tilde: qm_hat.d12_sq / qm_til.d12_sq,
                d11_tilde_over_hat: qm_til.d11_sq / qm_hat.d11_sq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = rows;
    rows.sort_by_key(|r| r.replicate);
    let summary = ZeroCommSummary {
        median_d11_hat_over_tilde: median(&mut rows.iter().map(|r| r.d11_hat_over_tilde).collect()),
        median_d12_hat_over_tilde: median(&mut rows.iter().map(|r| r.d12_hat_over_tilde).collect()),
        median_d11_tilde_over_hat: median(&mut rows.iter().map(|r| r.d11_tilde_over_hat).collect()),
    };
    Ok((rows, summary))
}

pub fn zero_comm_csv(cfg: &ZeroCommConfig) -> Result<String> {
    let (rows, summary) = zero_comm(cfg)?;
    let mut out = String::new();
    out.push_str("# schema=zero_comm.v1\n");
    out.push_str("kind,replicate,seed,d11_hat_over_tilde,d12_hat_over_tilde,d11_tilde_over_hat\n");
    for r in rows {
        let _ = writeln!(
            out,
            "row,{},{},{},{},{}",
            r.replicate,
            r.seed,
            fmt_f64(r.d11_hat_over_tilde),
            fmt_f64(r.d12_hat_over_tilde),
            fmt_f64(r.d11_tilde_over_hat)
        );
    }
    let _ = writeln!(
        out,
        "median,,,{},{},{}",
        fmt_f64(summary.median_d11_hat_over_tilde),
        fmt_f64(summary.median_d12_hat_over_tilde),
        fmt_f64(summary.median_d11_tilde_over_hat)
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// analytic-accuracy study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct AccuracyConfig {
    pub n: usize,
    pub pi: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub xs: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    /// Cells with `|alpha beta - gamma^2|` below this are skipped.
    pub degeneracy_tol: f64,
    pub spectral: SpectralOptions,
}

impl Default for AccuracyConfig {
    fn default() -> Self {
        AccuracyConfig {
            n: 1000,
            pi: 0.5,
            alphas: vec![0.4, 0.5, 0.6],
            betas: vec![0.5, 0.7, 0.9],
            xs: vec![0.1, 0.3, 0.5, 0.7, 2.0],
            replicates: 1,
            seed: 0,
            degeneracy_tol: 1e-6,
            spectral: SpectralOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AccuracyRow {
    pub cell: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
    pub seed: u64,
    pub skipped: bool,
    pub emp_ratio_d11: f64,
    pub emp_ratio_d12: f64,
    pub analytic_ratio_d11: f64,
    pub analytic_ratio_d12: f64,
    pub rel_err_d11: f64,
    pub rel_err_d12: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AccuracySummary {
    pub mean_d11: f64,
    pub median_d11: f64,
    pub max_d11: f64,
    pub mean_d12: f64,
    pub median_d12: f64,
    pub max_d12: f64,
    pub cells_run: usize,
    pub cells_skipped: usize,
}

pub fn analytic_accuracy(cfg: &AccuracyConfig) -> Result<(Vec<AccuracyRow>, AccuracySummary)> {
    if cfg.alphas.is_empty() || cfg.betas.is_empty() || cfg.xs.is_empty() || cfg.replicates == 0 {
        return Err(Error::InvalidParams("analytic-accuracy: empty grid".into()));
    }
    let mut cells = Vec::new();
    for &a in &cfg.alphas {
        for &b in &cfg.betas {
            for &x in &cfg.xs {
                cells.push((a, b, a * x));
            }
        }
    }
    let rows: Vec<Vec<AccuracyRow>> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(alpha, beta, gamma))| -> Result<Vec<AccuracyRow>> {
            let cell_seed = mix_seed(cfg.seed, idx as u64);
            let degenerate = (alpha * beta - gamma * gamma).abs() < cfg.degeneracy_tol;
            let out_of_range = gamma > 1.0 || gamma <= 0.0;
            if degenerate || out_of_range {
                return Ok(vec![AccuracyRow {
                    cell: idx,
                    alpha,
                    beta,
                    gamma,
                    replicate: 0,
                    seed: cell_seed,
                    skipped: true,
                    emp_ratio_d11: f64::NAN,
                    emp_ratio_d12: f64::NAN,
                    analytic_ratio_d11: f64::NAN,
                    analytic_ratio_d12: f64::NAN,
                    rel_err_d11: f64::NAN,
                    rel_err_d12: f64::NAN,
                }]);
            }
            let params = BlockModelParams::new(cfg.n, cfg.pi, alpha, beta, gamma)?;
            let table = empirical_vs_analytic_with(&params, cell_seed, cfg.replicates, &cfg.spectral)?;
            Ok(table
                .rows
                .into_iter()
                .map(|r| AccuracyRow {
                    cell: idx,
                    alpha,
                    beta,
                    gamma,
                    replicate: r.replicate,
                    seed: r.seed,
                    skipped: false,
                    emp_ratio_d11: r.emp_ratio_d11,
                    emp_ratio_d12: r.emp_ratio_d12,
                    analytic_ratio_d11: r.analytic_ratio_d11,
                    analytic_ratio_d12: r.analytic_ratio_d12,
                    rel_err_d11: r.rel_err_d11,
                    rel_err_d12: r.rel_err_d12,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<AccuracyRow> = rows.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.cell, r.replicate));
    let live: Vec<&AccuracyRow> = rows.iter().filter(|r| !r.skipped).collect();
    if live.is_empty() {
        return Err(Error::InvalidParams(
            "analytic-accuracy: every cell was degenerate or out of range".into(),
        ));
    }
    let mut e11: Vec<f64> = live.iter().map(|r| r.rel_err_d11).collect();
    let mut e12: Vec<f64> = live.iter().map(|r| r.rel_err_d12).collect();
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &Vec<f64>| v.iter().cloned().fold(0.0f64, f64::max);
    let summary = AccuracySummary {
        mean_d11: mean(&e11),
        max_d11: max(&e11),
        mean_d12: mean(&e12),
        max_d12: max(&e12),
        median_d11: median(&mut e11),
        median_d12: median(&mut e12),
        cells_run: live.len(),
        cells_skipped: rows.len() - live.len(),
    };
    Ok((rows, summary))
}

pub fn analytic_accuracy_csv(cfg: &AccuracyConfig) -> Result<String> {
    let (rows, s) = analytic_accuracy(cfg)?;
    let mut out = String::new();
    out.push_str("# schema=analytic_accuracy.v1\n");
    out.push_str(
        "kind,cell,alpha,beta,gamma,replicate,seed,skipped,emp_ratio_d11,emp_ratio_d12,\
         analytic_ratio_d11,analytic_ratio_d12,rel_err_d11,rel_err_d12\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "cell,{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell,
            fmt_f64(r.alpha),
            fmt_f64(r.beta),
            fmt_f64(r.gamma),
            r.replicate,
            r.seed,
            r.skipped as u8,
            fmt_f64(r.emp_ratio_d11),
            fmt_f64(r.emp_ratio_d12),
            fmt_f64(r.analytic_ratio_d11),
            fmt_f64(r.analytic_ratio_d12),
            fmt_f64(r.rel_err_d11),
            fmt_f64(r.rel_err_d12)
        );
    }
    for (kind, d11, d12) in [
        ("summary_mean", s.mean_d11, s.mean_d12),
        ("summary_median", s.median_d11, s.median_d12),
        ("summary_max", s.max_d11, s.max_d12),
    ] {
        let _ = writeln!(
            out,
            "{kind},,,,,,,,,,,,{},{}",
            fmt_f64(d11),
            fmt_f64(d12)
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// link prediction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LinkpredRow {
    pub method: &'static str,
    pub mode: &'static str,
    pub k_chosen: Option<usize>,
    pub auc: f64,
    pub seed: u64,
}

/// Runs the unnormalized, normalized, and Katz evaluations on one snapshot
/// stream and flattens the results to long-format rows.
pub fn linkpred_report(
    snapshots: &[Graph],
    seed: u64,
    theta: Option<f64>,
    opts: &ProtocolOptions,
) -> Result<Vec<LinkpredRow>> {
    let data = linkpred::prepare_protocol(snapshots)?;
    let mut rows = Vec::with_capacity(6);
    for (name, normalized) in [("unnormalized", false), ("normalized", true)] {
        let eval = linkpred::evaluate_blockmodel(&data, normalized, seed, opts)?;
        rows.push(LinkpredRow {
            method: name,
            mode: "links_included",
            k_chosen: eval.k_chosen,
            auc: eval.included.auc,
            seed,
        });
        rows.push(LinkpredRow {
            method: name,
            mode: "links_excluded",
            k_chosen: eval.k_chosen,
            auc: eval.excluded.auc,
            seed,
        });
    }
    let eval = linkpred::evaluate_katz(&data, theta, seed, opts)?;
    rows.push(LinkpredRow {
        method: "katz",
        mode: "links_included",
        k_chosen: None,
        auc: eval.included.auc,
        seed,
    });
    rows.push(LinkpredRow {
        method: "katz",
        mode: "links_excluded",
        k_chosen: None,
        auc: eval.excluded.auc,
        seed,
    });
    Ok(rows)
}

pub fn linkpred_csv(rows: &[LinkpredRow]) -> String {
    let mut out = String::new();
    out.push_str("# schema=linkpred.v1\n");
    out.push_str("method,mode,k_chosen,auc,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            r.mode,
            r.k_chosen.map_or(String::new(), |k| k.to_string()),
            fmt_f64(r.auc),
            r.seed
        );
    }
    out
}

// ---------------------------------------------------------------------------
// eigenvalue-deviation scaling experiment
// ---------------------------------------------------------------------------

/// Median absolute deviation of the leading adjacency eigenvalue from its
/// closed-form prediction, per graph size, raw and scaled by sqrt(n rho).
#[derive(Debug, Clone)]
pub struct EigScalingPoint {
    pub n: usize,
    pub rho: f64,
    pub median_abs_deviation: f64,
    pub median_over_sqrt_nrho: f64,
}

/// For each n, samples `replicates` graphs with expected degree
/// proportional to `log^2 n` at fixed `x = gamma/alpha` and reports the
/// median deviation of the top eigenvalue.
pub fn eigenvalue_scaling(
    ns: &[usize],
    x: f64,
    replicates: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<Vec<EigScalingPoint>> {
    let mut out = Vec::with_capacity(ns.len());
    for (ni, &n) in ns.iter().enumerate() {
        let nf = n as f64;
        let alpha = ((nf.ln().powi(2)) * 2.0 / (1.0 + x)) / nf;
        let params = BlockModelParams::new(n, 0.5, alpha, alpha, x * alpha)?;
        let devs: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let rep_seed = mix_seed(seed, ni as u64) ^ rep as u64;
                let (g, _) = sample(&params, rep_seed)?;
                let rep =
                    metrics::eigenvalue_deviation(&g, &params, &opts.eigen)?;
                Ok(rep.deviation[0].abs())
            })
            .collect::<Result<_>>()?;
        let mut devs = devs;
        let med = median(&mut devs);
        let rho = params.rho();
        out.push(EigScalingPoint {
            n,
            rho,
            median_abs_deviation: med,
            median_over_sqrt_nrho: med / (nf * rho).sqrt(),
        });
    }
    Ok(out)
}
