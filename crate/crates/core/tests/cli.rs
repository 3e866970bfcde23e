//! End-to-end checks of the `qgcmac` binary: exit codes, output files,
//! manifests, and reproducibility across seeds and worker counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qgcmac"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const TINY_CONFIG: &str = r#"{
    "n_list": [6],
    "k1": 1,
    "k2": 1,
    "l": 6,
    "epsilon_c": 4.0,
    "trials": 24,
    "seed": 5,
    "decode": true
}"#;

fn write_tiny_config(dir: &Path) -> String {
    let path = dir.join("sim.json");
    fs::write(&path, TINY_CONFIG).unwrap();
    path.display().to_string()
}

#[test]
fn convolve_prints_the_convolution() {
    let out = run(&["convolve", "--pa", "0.5,0.5,0,0", "--pb", "0.5,0.5,0,0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out).trim(),
        "2.50000000000e-1,5.00000000000e-1,2.50000000000e-1,0.00000000000e0"
    );
}

#[test]
fn malformed_inputs_exit_two() {
    let cases: &[&[&str]] = &[
        &["convolve", "--pa", "0.5,oops", "--pb", "0.5,0.5"],
        &["convolve", "--pa", "0.5,0.5", "--pb", "1"],
        &["convolve", "--pa", "0.5,0.5,0.5", "--pb", "0.3,0.3,0.4"],
        &["region", "qgc", "--channel", "/nonexistent/channel.json", "--assignment", "lemma4"],
        &["simulate", "--config", "/nonexistent/sim.json"],
        &["region", "gp", "--assignment", "lemma4", "--search"],
        &["simulate", "--workers", "0"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains("error"), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn bound_violation_exits_one() {
    let out = run(&["verify", "ptp-table", "--resolution", "4", "--refine", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("VIOLATED"), "{}", stdout(&out));
    let err = stderr(&out);
    assert!(err.starts_with("FAIL:"), "{err}");
    assert!(err.contains("at state"), "{err}");
}

#[test]
fn passing_verification_exits_zero() {
    let out = run(&["verify", "decompositions", "--mixture-grid", "6"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("decompositions: residual"));
}

#[test]
fn same_seed_simulations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");

    for out_dir in [&out_a, &out_b] {
        let out = run(&["simulate", "--config", &config, "--out-dir", &out_dir.display().to_string()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = fs::read(out_a.join("stats.csv")).unwrap();
    let b = fs::read(out_b.join("stats.csv")).unwrap();
    assert_eq!(a, b);

    let out = run(&[
        "simulate", "--config", &config, "--seed", "9",
        "--out-dir", &out_c.display().to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let c = fs::read(out_c.join("stats.csv")).unwrap();
    assert_ne!(a, c, "independent seeds produced identical tallies");
}

#[test]
fn worker_count_leaves_results_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let mut outputs = Vec::new();
    for (label, workers) in [("w1", "1"), ("w4", "4")] {
        let out_dir = dir.path().join(label);
        let out = bin()
            .args(["simulate", "--config", &config, "--out-dir", &out_dir.display().to_string()])
            .env("QGCMAC_WORKERS", workers)
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(fs::read(out_dir.join("stats.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_writes_stats_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let out_dir = dir.path().join("run");
    let out = run(&["simulate", "--config", &config, "--out-dir", &out_dir.display().to_string()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let csv = fs::read_to_string(out_dir.join("stats.csv")).unwrap();
    assert!(csv.starts_with("n,l,epsilon,trials,e1_rate,e2_rate,ed_rate,conditional_decode_accuracy\n"));
    assert_eq!(stdout(&out).lines().next().unwrap(), csv.lines().next().unwrap());

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("stats.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 1);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["command"].as_str().unwrap().contains("simulate"));
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    let written: Vec<&str> = manifest["output_paths"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(written.iter().any(|p| p.ends_with("stats.csv")));
    assert!(written.iter().any(|p| p.ends_with("stats.json")));
}

#[test]
fn verify_out_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "verify", "decompositions", "--mixture-grid", "6",
        "--out", &report_path.display().to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["max_reconstruction_error"].as_f64().unwrap() <= 1e-12);

    let manifest_path = dir.path().join("report.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(manifest_path).unwrap()).unwrap();
    assert!(manifest["command"].as_str().unwrap().contains("decompositions"));
}

#[test]
fn region_search_writes_frontier() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("region");
    let out = run(&[
        "region", "gp",
        "--u-size1", "2", "--u-size2", "2",
        "--restarts", "2", "--iters", "40", "--seed", "3",
        "--out-dir", &out_dir.display().to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("gp search: max sum-rate"));

    let frontier = fs::read_to_string(out_dir.join("frontier.csv")).unwrap();
    assert!(frontier.starts_with("R1,R2\n"));
    assert!(frontier.lines().count() >= 2);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "gp");
    assert_eq!(report["mode"], "search");
    assert!(out_dir.join("manifest.json").exists());
}
