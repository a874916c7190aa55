use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rankpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankpa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = rankpa(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_minimal_config_writes_two_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "r = 3\nxi = [0, 1, 0]\nalpha = 0.0\nsteps = 1000\nseed = 1\n");
    let out = tmp.path().join("out");
    ok(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);

    let mut names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["manifest.json", "trajectory.csv"]);

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["seeds"], serde_json::json!([1]));
    assert!(manifest["rng_algorithm"].as_str().unwrap().contains("chacha"));

    let mut reader = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let last = reader.records().last().unwrap().unwrap();
    assert_eq!(&last[0], "1000");
}

#[test]
fn invalid_alpha_is_rejected_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "xi = [0, 1, 0]\nalpha = -1.5\nsteps = 10\nseed = 1\n");
    let out = rankpa(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must exceed -1"));
}

#[test]
fn malformed_config_names_field_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "xi = [0, 1, 0]\nalpha = 0\nsteps = 10\nseed = 1\nsigma = 3\n");
    let out = rankpa(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigma") && err.contains("line 5"), "{err}");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "xi = \"rank 2 of 3\"\nalpha = -0.75\nsteps = 5000\nseed = 42\n");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap()]);
    ok(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(b.join("trajectory.csv")).unwrap()
    );

    let c = tmp.path().join("c");
    ok(&["simulate", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "43"]);
    assert_ne!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(c.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn analyze_middle_of_three_window() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    ok(&["analyze", "--xi", "rank 2 of 3", "--alpha", "-0.75", "--out", out.to_str().unwrap()]);
    let report = read_json(&out.join("phase_report.json"));
    let t = &report["thresholds"];
    let lo = (9.0 - 6f64.sqrt()) / 18.0;
    let hi = (9.0 + 6f64.sqrt()) / 18.0;
    assert!((t["window_lo"].as_f64().unwrap() - lo).abs() < 1e-8);
    assert!((t["window_hi"].as_f64().unwrap() - hi).abs() < 1e-8);
    assert_eq!(report["mid3_regime"]["regime"], "window_jump");
}

#[test]
fn analyze_second_or_sixth_reports_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    ok(&[
        "analyze",
        "--xi",
        "0,0.5,0,0,0,0.5,0",
        "--alpha",
        "-0.85",
        "--grid-points",
        "400",
        "--out",
        out.to_str().unwrap(),
    ]);
    let report = read_json(&out.join("phase_report.json"));
    for key in ["alpha1", "alpha2", "alpha3", "alpha4"] {
        assert!(report["thresholds"][key].is_f64(), "missing {key}");
    }
    let alpha1 = (35.0 * 10f64.sqrt() - 116.0) / 9.0;
    assert!((report["thresholds"]["alpha1"].as_f64().unwrap() - alpha1).abs() < 1e-6);
}

#[test]
fn analyze_top_of_two_is_capped_at_one_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    ok(&["analyze", "--xi", "rank 1 of 2", "--alpha", "-0.5", "--out", out.to_str().unwrap()]);
    let report = read_json(&out.join("phase_report.json"));
    assert!(report["prediction"]["max_points"].as_u64().unwrap() <= 1);
}

#[test]
fn analyze_requires_parameters() {
    let out = rankpa(&["analyze", "--alpha", "0"]);
    assert!(!out.status.success());
}

#[test]
fn scan_smoke_and_empty_range() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    ok(&[
        "scan",
        "--xi",
        "rank 2 of 3",
        "--alphas=-0.75,0",
        "--runs",
        "1",
        "--steps",
        "100",
        "--workers",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(out.join("scan.csv")).unwrap();
    assert_eq!(&reader.headers().unwrap()[0], "alpha");
    assert_eq!(reader.records().count(), 2);
    assert!(out.join("manifest.json").exists());

    let empty = rankpa(&["scan", "--xi", "rank 2 of 3", "--out", tmp.path().join("e").to_str().unwrap()]);
    assert!(!empty.status.success());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("alphas"));
}

#[test]
fn reproduce_analysis_figures() {
    let tmp = tempfile::tempdir().unwrap();
    let roots = tmp.path().join("roots");
    ok(&["reproduce", "--figure", "mid3-roots", "--out", roots.to_str().unwrap()]);
    assert!(roots.join("root_curves.csv").exists());
    assert!(roots.join("branches.csv").exists());
    let manifest = read_json(&roots.join("manifest.json"));
    assert_eq!(manifest["command"], "reproduce");
    assert_eq!(manifest["details"]["figure"], "mid3-roots");

    let eigen = tmp.path().join("eigen");
    ok(&["reproduce", "--figure", "eigen-plot", "--out", eigen.to_str().unwrap()]);
    for f in ["lambda1.csv", "lambda2_delta2.csv", "lambda2_delta3.csv"] {
        assert!(eigen.join(f).exists(), "missing {f}");
    }
}

#[test]
fn reproduce_simulated_figure_at_small_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sims");
    ok(&[
        "reproduce",
        "--figure",
        "sec6-85",
        "--steps",
        "2000",
        "--seed",
        "3,4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(out.join("trajectory_seed3.csv").exists());
    assert!(out.join("trajectory_seed4.csv").exists());
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["seeds"], serde_json::json!([3, 4]));
    assert_eq!(manifest["details"]["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn reproduce_unknown_figure_lists_choices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rankpa(&["reproduce", "--figure", "fig9", "--out", tmp.path().join("x").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["mid3-sims", "sec6-85", "sec6-95", "mid3-roots", "eigen-plot"] {
        assert!(err.contains(name), "{err}");
    }
}
