//! Black-box tests of the command-line interface: output determinism,
//! config handling, and the documented exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockspec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn blockspec")
}

#[test]
fn generate_is_deterministic_given_seed() {
    let a = run(&["generate", "--n", "120", "--alpha", "0.1", "--gamma", "0.02", "--seed", "9"]);
    let b = run(&["generate", "--n", "120", "--alpha", "0.1", "--gamma", "0.02", "--seed", "9"]);
    let c = run(&["generate", "--n", "120", "--alpha", "0.1", "--gamma", "0.02", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn ratio_surface_csv_regenerates_bit_identically() {
    let args = [
        "ratio-surface",
        "--alphas",
        "0.2,0.4",
        "--xs",
        "0.25,0.5,0.75",
        "--seed",
        "3",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# schema=ratio_surface.v1\n"));
    // 2 alphas x 3 xs data rows + schema + header.
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn cluster_pipeline_via_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("g.edges");
    let labels_path = dir.path().join("g.labels");
    let out_path = dir.path().join("clusters.tsv");

    let gen = bin()
        .args([
            "generate",
            "--n",
            "200",
            "--alpha",
            "0.15",
            "--gamma",
            "0.01",
            "--seed",
            "5",
            "--out",
            graph_path.to_str().unwrap(),
            "--labels-out",
            labels_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(gen.status.success());
    assert!(labels_path.exists());

    let clu = bin()
        .args([
            "cluster",
            "--input",
            graph_path.to_str().unwrap(),
            "--normalized",
            "true",
            "--giant",
            "true",
            "--truth",
            labels_path.to_str().unwrap(),
            "--seed",
            "2",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(clu.status.success(), "stderr: {}", String::from_utf8_lossy(&clu.stderr));
    let stderr = String::from_utf8_lossy(&clu.stderr);
    let mis: f64 = stderr
        .lines()
        .find_map(|l| l.strip_prefix("misclassification="))
        .expect("misclassification line")
        .parse()
        .unwrap();
    assert!(mis < 0.1, "misclassification {mis}");
    let body = fs::read_to_string(&out_path).unwrap();
    assert!(body.lines().count() >= 190);
    assert!(body.lines().all(|l| l.split('\t').count() == 2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "alphas=0.3\nxs=0.5\nn=100000\nseed=4\n").unwrap();
    let from_cfg = run(&["ratio-surface", "--config", cfg.to_str().unwrap()]);
    assert!(from_cfg.status.success());
    let text = String::from_utf8(from_cfg.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().last().unwrap().starts_with("0.3,0.15,0.5,"));

    // Flag wins over the config key.
    let overridden = run(&[
        "ratio-surface",
        "--config",
        cfg.to_str().unwrap(),
        "--alphas",
        "0.4",
    ]);
    let text = String::from_utf8(overridden.stdout).unwrap();
    assert!(text.lines().last().unwrap().starts_with("0.4,0.2,0.5,"));
}

#[test]
fn exit_codes_distinguish_config_from_runtime() {
    // Unknown sweep mode: config error, code 2.
    let bad_mode = run(&["sweep", "--mode", "bogus"]);
    assert_eq!(bad_mode.status.code(), Some(2));

    // Malformed config file: code 2 with a line diagnostic.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n=100\nnot a pair\n").unwrap();
    let bad_cfg = run(&["zero-comm", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad_cfg.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad_cfg.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");

    // Unknown key in config: code 2 naming the field.
    fs::write(&cfg, "bogus_key=1\n").unwrap();
    let unknown = run(&["zero-comm", "--config", cfg.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("bogus_key"));

    // Runtime failure (missing input file after validation): code 1.
    let missing = run(&["cluster", "--input", "/nonexistent/x.edges"]);
    assert_eq!(missing.status.code(), Some(1));

    // Usage error from the argument parser: code 2.
    let usage = bin().arg("no-such-command").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn linkpred_manifest_flow() {
    let dir = tempfile::tempdir().unwrap();
    // Build three snapshot files through the generate subcommand, then a
    // manifest referencing them by relative path.
    for (i, seed) in [("s0", "100"), ("s1", "101"), ("s2", "102")] {
        let path = dir.path().join(format!("{i}.edges"));
        let out = bin()
            .args([
                "generate",
                "--n",
                "150",
                "--alpha",
                "0.2",
                "--gamma",
                "0.03",
                "--seed",
                seed,
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let manifest = dir.path().join("stream.manifest");
    fs::write(&manifest, "s0.edges\ns1.edges\ns2.edges\n").unwrap();
    let out = run(&[
        "linkpred",
        "--manifest",
        manifest.to_str().unwrap(),
        "--k-grid",
        "2,4",
        "--runs",
        "2",
        "--sample-nodes",
        "25",
        "--seed",
        "8",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8); // schema + header + 6 rows
    for needle in ["unnormalized,", "normalized,", "katz,"] {
        assert!(text.contains(needle));
    }

    // A manifest with fewer than three snapshots is a config error.
    let short = dir.path().join("short.manifest");
    fs::write(&short, "s0.edges\ns1.edges\n").unwrap();
    let bad = run(&["linkpred", "--manifest", short.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn zero_comm_reports_median_near_four() {
    let out = run(&[
        "zero-comm",
        "--n",
        "600",
        "--alpha",
        "0.05",
        "--replicates",
        "6",
        "--seed",
        "13",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let median_line = text.lines().last().unwrap();
    let fields: Vec<&str> = median_line.split(',').collect();
    assert_eq!(fields[0], "median");
    let d11: f64 = fields[3].parse().unwrap();
    assert!((2.0..7.0).contains(&d11), "median ratio {d11}");
}

#[test]
fn help_lists_all_subcommands() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in [
        "generate",
        "cluster",
        "metrics",
        "ratio-surface",
        "sweep",
        "analytic-accuracy",
        "zero-comm",
        "linkpred",
    ] {
        assert!(text.contains(sub), "help missing {sub}");
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_blockspec")).exists());
}
