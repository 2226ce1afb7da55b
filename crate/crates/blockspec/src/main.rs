//! Command-line front end: seeded experiment runners emitting CSV, plus
//! one-shot subcommands for sampling, clustering, and metric evaluation.
//!
//! Exit codes: 0 on success, 2 on configuration or usage errors, 1 on
//! runtime failures.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blockspec::clustering::{spectral_cluster_with, SpectralOptions};
use blockspec::experiment::{
    analytic_accuracy_csv, linkpred_csv, linkpred_report, ratio_surface_csv, sweep_csv,
    zero_comm_csv, AccuracyConfig, KvConfig, RatioSurfaceConfig, SweepConfig, ZeroCommConfig,
};
use blockspec::graph::{load_edge_list, load_edge_lists_shared, load_labels, save_edge_list, Graph, LoadedGraph};
use blockspec::linkpred::ProtocolOptions;
use blockspec::metrics::{empirical_vs_analytic, misclassification_rate, quality_metrics};
use blockspec::sbm::{sample, sample_snapshot_stream, BlockModelParams};
use blockspec::{Error, NodeLabeling};

#[derive(Parser)]
#[command(
    name = "blockspec",
    about = "Spectral clustering on two-class stochastic blockmodels: sampling, metrics, and experiment sweeps",
    version
)]
struct Cli {
    /// Base seed; recorded in every output row.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat key=value config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a blockmodel graph and write its edge list.
    Generate(GenerateArgs),
    /// Spectral-cluster an edge-list graph and write node labels.
    Cluster(ClusterArgs),
    /// Quality metrics for both pipelines on a graph, or an
    /// empirical-vs-analytic comparison table for sampled models.
    Metrics(MetricsArgs),
    /// Analytic variance-ratio surface over a parameter grid.
    RatioSurface(RatioSurfaceArgs),
    /// Train/test misclassification sweeps (rate grid or size grid).
    Sweep(SweepArgs),
    /// Grid accuracy study of the analytic ratios against sampled graphs.
    AnalyticAccuracy(AccuracyArgs),
    /// Zero-communication variance/bias ratio replicates (gamma = 0).
    ZeroComm(ZeroCommArgs),
    /// Temporal link-prediction protocol with the Katz baseline.
    Linkpred(LinkpredArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Also write the true labels to this path (node<TAB>label).
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Edge-list file to cluster.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    normalized: Option<bool>,
    /// Iteratively remove nodes below this degree before clustering.
    #[arg(long)]
    prune_min_degree: Option<usize>,
    /// Restrict to the largest connected component before clustering.
    #[arg(long)]
    giant: Option<bool>,
    /// Truth labels (node<TAB>label); prints the misclassification rate.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Edge-list file; with --truth, evaluates both pipelines on it.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args)]
struct RatioSurfaceArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pi: Option<f64>,
    /// Comma list or lo:hi:step range.
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long)]
    xs: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// gamma-alpha (rate grid at fixed n) or n (size grid at fixed rates).
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    xs: Option<String>,
    #[arg(long)]
    ns: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    giant_min_fraction: Option<f64>,
}

#[derive(Args)]
struct AccuracyArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    xs: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    degeneracy_tol: Option<f64>,
}

#[derive(Args)]
struct ZeroCommArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args)]
struct LinkpredArgs {
    /// Text file listing one edge-list path per line in temporal order.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Synthetic stream parameters, used when no manifest is given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    persistence: Option<f64>,
    #[arg(long)]
    sample_nodes: Option<usize>,
    #[arg(long)]
    k_grid: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    /// Katz damping; defaults to 0.8 / lambda1 of the training graph.
    #[arg(long)]
    theta: Option<f64>,
}

/// Configuration-stage failure: reported on stderr, exit code 2.
struct ConfigError(Error);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(ConfigError(e))) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    Config(ConfigError),
    Runtime(Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Runtime(e)
    }
}

fn cfg_err(e: Error) -> RunError {
    RunError::Config(ConfigError(e))
}

fn load_config(path: &Option<PathBuf>) -> Result<KvConfig, RunError> {
    match path {
        None => Ok(KvConfig::default()),
        Some(p) => {
            let mut text = String::new();
            File::open(p)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| cfg_err(Error::Io(e)))?;
            KvConfig::parse(&text).map_err(cfg_err)
        }
    }
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, RunError> {
    match out {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => {
            let f = File::create(p).map_err(|e| cfg_err(Error::Io(e)))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn parse_list(cli_val: &Option<String>, cfg: &KvConfig, key: &str) -> Result<Option<Vec<f64>>, RunError> {
    if let Some(s) = cli_val {
        let synth = KvConfig::parse(&format!("{key}={s}")).map_err(cfg_err)?;
        return synth.get_f64_list(key).map_err(cfg_err);
    }
    cfg.get_f64_list(key).map_err(cfg_err)
}

fn parse_usize_list(
    cli_val: &Option<String>,
    cfg: &KvConfig,
    key: &str,
) -> Result<Option<Vec<usize>>, RunError> {
    if let Some(s) = cli_val {
        let synth = KvConfig::parse(&format!("{key}={s}")).map_err(cfg_err)?;
        return synth.get_usize_list(key).map_err(cfg_err);
    }
    cfg.get_usize_list(key).map_err(cfg_err)
}

/// Resolution order: command-line flag, then config key, then default.
macro_rules! resolve {
    ($flag:expr, $cfg:expr, $get:ident, $key:literal, $default:expr) => {
        match $flag {
            Some(v) => v,
            None => $cfg.$get($key).map_err(cfg_err)?.unwrap_or($default),
        }
    };
}

fn resolve_params(
    cfg: &KvConfig,
    n: Option<usize>,
    pi: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> Result<BlockModelParams, RunError> {
    let n = resolve!(n, cfg, get_usize, "n", 1000);
    let pi = resolve!(pi, cfg, get_f64, "pi", 0.5);
    let alpha = resolve!(alpha, cfg, get_f64, "alpha", 0.02);
    let beta = resolve!(beta, cfg, get_f64, "beta", alpha);
    let gamma = resolve!(gamma, cfg, get_f64, "gamma", 0.0);
    BlockModelParams::new(n, pi, alpha, beta, gamma).map_err(cfg_err)
}

fn load_graph_file(path: &Path) -> Result<LoadedGraph, RunError> {
    let f = File::open(path).map_err(|e| RunError::Runtime(Error::Io(e)))?;
    load_edge_list(BufReader::new(f)).map_err(RunError::Runtime)
}

fn run(cli: Cli) -> Result<(), RunError> {
    let cfg = load_config(&cli.config)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.get_u64("seed").map_err(cfg_err)?.unwrap_or(0),
    };
    let mut out = open_out(&cli.out)?;

    match cli.cmd {
        Cmd::Generate(a) => {
            cfg.reject_unknown(&["n", "pi", "alpha", "beta", "gamma", "seed"])
                .map_err(cfg_err)?;
            let params = resolve_params(&cfg, a.n, a.pi, a.alpha, a.beta, a.gamma)?;
            let (g, labels) = sample(&params, seed)?;
            save_edge_list(&g, &mut out, None)?;
            if let Some(path) = a.labels_out {
                let mut lf = BufWriter::new(File::create(path).map_err(Error::Io)?);
                for i in 0..g.node_count() {
                    writeln!(lf, "{i}\t{}", labels.label(i)).map_err(Error::Io)?;
                }
            }
            eprintln!(
                "generated n={} edges={} seed={} (class sizes {:?})",
                g.node_count(),
                g.edge_count(),
                seed,
                labels.class_sizes()
            );
        }

        Cmd::Cluster(a) => {
            cfg.reject_unknown(&[
                "input",
                "k",
                "normalized",
                "prune_min_degree",
                "giant",
                "truth",
                "seed",
            ])
            .map_err(cfg_err)?;
            let input = match (&a.input, cfg.get_str("input")) {
                (Some(p), _) => p.clone(),
                (None, Some(s)) => PathBuf::from(s),
                (None, None) => {
                    return Err(cfg_err(Error::InvalidParams(
                        "cluster: --input is required".into(),
                    )))
                }
            };
            let k = resolve!(a.k, cfg, get_usize, "k", 2);
            let normalized = resolve!(a.normalized, cfg, get_bool, "normalized", false);
            let prune = resolve!(a.prune_min_degree, cfg, get_usize, "prune_min_degree", 0);
            let giant = resolve!(a.giant, cfg, get_bool, "giant", false);
            if k < 1 {
                return Err(cfg_err(Error::InvalidParams("cluster: k must be >= 1".into())));
            }

            let loaded = load_graph_file(&input)?;
            let mut g = loaded.graph;
            let mut names: Vec<String> = loaded.node_names.clone();
            if prune > 0 {
                let (pg, map) = g.prune_min_degree(prune);
                names = (0..pg.node_count()).map(|i| names[map.old_id(i)].clone()).collect();
                g = pg;
            }
            if giant {
                let (cg, map) = g.largest_connected_component();
                names = (0..cg.node_count()).map(|i| names[map.old_id(i)].clone()).collect();
                g = cg;
            }
            if g.node_count() < k {
                return Err(RunError::Runtime(Error::Invalid(format!(
                    "{} nodes left after preprocessing, need at least k = {k}",
                    g.node_count()
                ))));
            }
            let (assignment, _) = spectral_cluster_with(&g, k, normalized, seed, &SpectralOptions::default())?;
            for (i, name) in names.iter().enumerate() {
                writeln!(out, "{name}\t{}", assignment.labels[i]).map_err(Error::Io)?;
            }
            eprintln!(
                "clustered n={} k={k} normalized={normalized} within_ss={} balance={}",
                g.node_count(),
                assignment.within_ss,
                assignment.balance
            );
            if let Some(tpath) = &a.truth {
                let tf = File::open(tpath).map_err(Error::Io)?;
                // Truth files label the original tokens; restrict to survivors.
                let full = load_labels(BufReader::new(tf), &loaded.node_names)?;
                let kept: Vec<usize> = names
                    .iter()
                    .map(|nm| loaded.node_names.iter().position(|o| o == nm).expect("kept token"))
                    .collect();
                let truth = NodeLabeling::with_classes(
                    kept.iter().map(|&old| full.label(old)).collect(),
                    full.class_count(),
                );
                let predicted = NodeLabeling::with_classes(assignment.labels.clone(), k);
                let mis = misclassification_rate(&predicted, &truth)?;
                eprintln!("misclassification={mis}");
            }
        }

        Cmd::Metrics(a) => {
            cfg.reject_unknown(&[
                "input",
                "truth",
                "n",
                "pi",
                "alpha",
                "beta",
                "gamma",
                "replicates",
                "seed",
            ])
            .map_err(cfg_err)?;
            let input = match (&a.input, cfg.get_str("input")) {
                (Some(p), _) => Some(p.clone()),
                (None, Some(s)) => Some(PathBuf::from(s)),
                (None, None) => None,
            };
            match input {
                Some(path) => {
                    let truth_path = match (&a.truth, cfg.get_str("truth")) {
                        (Some(p), _) => p.clone(),
                        (None, Some(s)) => PathBuf::from(s),
                        (None, None) => {
                            return Err(cfg_err(Error::InvalidParams(
                                "metrics: --truth is required with --input".into(),
                            )))
                        }
                    };
                    let loaded = load_graph_file(&path)?;
                    let tf = File::open(&truth_path).map_err(Error::Io)?;
                    let truth = load_labels(BufReader::new(tf), &loaded.node_names)?;
                    writeln!(out, "# schema=metrics.v1").map_err(Error::Io)?;
                    writeln!(out, "method,d11_sq,d12_sq,d21_sq,d22_sq,center_gap_sq,seed")
                        .map_err(Error::Io)?;
                    for (name, normalized) in [("unnormalized", false), ("normalized", true)] {
                        let emb = blockspec::clustering::spectral_embedding(
                            &loaded.graph,
                            2,
                            normalized,
                            seed,
                            &SpectralOptions::default(),
                        )?;
                        let qm = quality_metrics(&emb, &truth)?;
                        writeln!(
                            out,
                            "{name},{},{},{},{},{},{seed}",
                            qm.d11_sq, qm.d12_sq, qm.d21_sq, qm.d22_sq, qm.center_gap_sq
                        )
                        .map_err(Error::Io)?;
                    }
                }
                None => {
                    let params = resolve_params(&cfg, a.n, a.pi, a.alpha, a.beta, a.gamma)?;
                    let replicates = resolve!(a.replicates, cfg, get_usize, "replicates", 10);
                    let table = empirical_vs_analytic(&params, seed, replicates)?;
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    out.write_all(&buf).map_err(Error::Io)?;
                    let s = table.summary();
                    eprintln!(
                        "rel_err d11: mean={} median={} max={} | d12: mean={} median={} max={}",
                        s.mean_d11, s.median_d11, s.max_d11, s.mean_d12, s.median_d12, s.max_d12
                    );
                }
            }
        }

        Cmd::RatioSurface(a) => {
            cfg.reject_unknown(&["n", "pi", "alphas", "gammas", "xs", "seed"])
                .map_err(cfg_err)?;
            let defaults = RatioSurfaceConfig::default();
            let alphas = parse_list(&a.alphas, &cfg, "alphas")?.unwrap_or(defaults.alphas);
            let gammas = parse_list(&a.gammas, &cfg, "gammas")?;
            let xs = parse_list(&a.xs, &cfg, "xs")?;
            let rc = RatioSurfaceConfig {
                n: resolve!(a.n, cfg, get_usize, "n", defaults.n),
                pi: resolve!(a.pi, cfg, get_f64, "pi", defaults.pi),
                alphas,
                gammas: if xs.is_some() { gammas } else { gammas.or(defaults.gammas) },
                xs,
            };
            let csv = ratio_surface_csv(&rc).map_err(RunError::Runtime)?;
            out.write_all(csv.as_bytes()).map_err(Error::Io)?;
        }

        Cmd::Sweep(a) => {
            cfg.reject_unknown(&[
                "mode",
                "n",
                "alphas",
                "xs",
                "ns",
                "alpha",
                "beta",
                "gamma",
                "pi",
                "replicates",
                "giant_min_fraction",
                "seed",
            ])
            .map_err(cfg_err)?;
            let mode = match (&a.mode, cfg.get_str("mode")) {
                (Some(m), _) => m.clone(),
                (None, Some(m)) => m.to_string(),
                (None, None) => "gamma-alpha".to_string(),
            };
            let pi = resolve!(a.pi, cfg, get_f64, "pi", 0.5);
            let replicates = resolve!(a.replicates, cfg, get_usize, "replicates", 20);
            let mut sc = match mode.as_str() {
                "gamma-alpha" => {
                    let n = resolve!(a.n, cfg, get_usize, "n", 1000);
                    let alphas = parse_list(&a.alphas, &cfg, "alphas")?
                        .unwrap_or_else(|| vec![0.01, 0.012, 0.014, 0.016, 0.018]);
                    let xs = parse_list(&a.xs, &cfg, "xs")?
                        .unwrap_or_else(|| vec![0.025, 0.125, 0.4, 1.2]);
                    SweepConfig::gamma_alpha(n, &alphas, &xs, pi, replicates, seed)
                }
                "n" => {
                    let ns = parse_usize_list(&a.ns, &cfg, "ns")?
                        .unwrap_or_else(|| vec![1000, 1200, 1400, 1600, 1800, 2000]);
                    let alpha = resolve!(a.alpha, cfg, get_f64, "alpha", 0.01);
                    let beta = resolve!(a.beta, cfg, get_f64, "beta", alpha);
                    let gamma = resolve!(a.gamma, cfg, get_f64, "gamma", 0.002);
                    SweepConfig::n_grid(&ns, alpha, beta, gamma, pi, replicates, seed)
                }
                other => {
                    return Err(cfg_err(Error::InvalidParams(format!(
                        "sweep: unknown mode {other:?} (gamma-alpha or n)"
                    ))))
                }
            };
            sc.giant_min_fraction = resolve!(a.giant_min_fraction, cfg, get_f64, "giant_min_fraction", 0.95);
            let csv = sweep_csv(&sc).map_err(RunError::Runtime)?;
            out.write_all(csv.as_bytes()).map_err(Error::Io)?;
        }

        Cmd::AnalyticAccuracy(a) => {
            cfg.reject_unknown(&[
                "n",
                "pi",
                "alphas",
                "betas",
                "xs",
                "replicates",
                "degeneracy_tol",
                "seed",
            ])
            .map_err(cfg_err)?;
            let defaults = AccuracyConfig::default();
            let ac = AccuracyConfig {
                n: resolve!(a.n, cfg, get_usize, "n", defaults.n),
                pi: resolve!(a.pi, cfg, get_f64, "pi", defaults.pi),
                alphas: parse_list(&a.alphas, &cfg, "alphas")?.unwrap_or(defaults.alphas),
                betas: parse_list(&a.betas, &cfg, "betas")?.unwrap_or(defaults.betas),
                xs: parse_list(&a.xs, &cfg, "xs")?.unwrap_or(defaults.xs),
                replicates: resolve!(a.replicates, cfg, get_usize, "replicates", defaults.replicates),
                seed,
                degeneracy_tol: resolve!(
                    a.degeneracy_tol,
                    cfg,
                    get_f64,
                    "degeneracy_tol",
                    defaults.degeneracy_tol
                ),
                spectral: SpectralOptions::default(),
            };
            let csv = analytic_accuracy_csv(&ac).map_err(RunError::Runtime)?;
            out.write_all(csv.as_bytes()).map_err(Error::Io)?;
        }

        Cmd::ZeroComm(a) => {
            cfg.reject_unknown(&["n", "pi", "alpha", "replicates", "seed"])
                .map_err(cfg_err)?;
            let defaults = ZeroCommConfig::default();
            let zc = ZeroCommConfig {
                n: resolve!(a.n, cfg, get_usize, "n", defaults.n),
                pi: resolve!(a.pi, cfg, get_f64, "pi", defaults.pi),
                alpha: resolve!(a.alpha, cfg, get_f64, "alpha", defaults.alpha),
                gamma: 0.0,
                replicates: resolve!(a.replicates, cfg, get_usize, "replicates", defaults.replicates),
                seed,
                spectral: SpectralOptions::default(),
            };
            let csv = zero_comm_csv(&zc).map_err(RunError::Runtime)?;
            out.write_all(csv.as_bytes()).map_err(Error::Io)?;
        }

        Cmd::Linkpred(a) => {
            cfg.reject_unknown(&[
                "manifest",
                "n",
                "pi",
                "alpha",
                "beta",
                "gamma",
                "snapshots",
                "persistence",
                "sample_nodes",
                "k_grid",
                "runs",
                "theta",
                "seed",
            ])
            .map_err(cfg_err)?;
            let manifest = match (&a.manifest, cfg.get_str("manifest")) {
                (Some(p), _) => Some(p.clone()),
                (None, Some(s)) => Some(PathBuf::from(s)),
                (None, None) => None,
            };
            let snaps: Vec<Graph> = match manifest {
                Some(mpath) => {
                    let mut text = String::new();
                    File::open(&mpath)
                        .and_then(|mut f| f.read_to_string(&mut text))
                        .map_err(|e| cfg_err(Error::Io(e)))?;
                    let base = mpath.parent().unwrap_or(Path::new("."));
                    let paths: Vec<PathBuf> = text
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(|l| {
                            let p = PathBuf::from(l);
                            if p.is_absolute() {
                                p
                            } else {
                                base.join(p)
                            }
                        })
                        .collect();
                    if paths.len() < 3 {
                        return Err(cfg_err(Error::InvalidParams(format!(
                            "linkpred: manifest lists {} snapshots, need >= 3",
                            paths.len()
                        ))));
                    }
                    let mut readers = Vec::new();
                    for p in &paths {
                        readers.push(BufReader::new(File::open(p).map_err(Error::Io)?));
                    }
                    let (graphs, _names) = load_edge_lists_shared(readers)?;
                    graphs
                }
                None => {
                    let params = resolve_params(&cfg, a.n, a.pi, a.alpha, a.beta, a.gamma)?;
                    let count = resolve!(a.snapshots, cfg, get_usize, "snapshots", 3);
                    let persistence = resolve!(a.persistence, cfg, get_f64, "persistence", 0.5);
                    let (snaps, _) = sample_snapshot_stream(&params, count, persistence, seed)?;
                    eprintln!(
                        "synthetic stream: {} snapshots of n={} (persistence {persistence})",
                        snaps.len(),
                        params.n
                    );
                    snaps
                }
            };
            let mut opts = ProtocolOptions {
                sample_nodes: resolve!(a.sample_nodes, cfg, get_usize, "sample_nodes", 100),
                runs: resolve!(a.runs, cfg, get_usize, "runs", 5),
                ..ProtocolOptions::default()
            };
            if let Some(grid) = parse_usize_list(&a.k_grid, &cfg, "k_grid")? {
                if grid.is_empty() {
                    return Err(cfg_err(Error::InvalidParams("linkpred: empty k grid".into())));
                }
                opts.k_grid = grid;
            }
            let theta = match a.theta {
                Some(t) => Some(t),
                None => cfg.get_f64("theta").map_err(cfg_err)?,
            };
            let rows = linkpred_report(&snaps, seed, theta, &opts)?;
            out.write_all(linkpred_csv(&rows).as_bytes()).map_err(Error::Io)?;
        }
    }
    out.flush().map_err(Error::Io)?;
    Ok(())
}
