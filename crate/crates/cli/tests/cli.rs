use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cluster-describe"));
    c.env_remove("CLUSTER_DESCRIBE_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = r#"{"version": 1, "n": 4, "m": 4, "k": 2, "clusters": ["1", "2"],
  "objects": [
    {"id": "a", "cluster": "1", "tags": [0, 1]},
    {"id": "b", "cluster": "1", "tags": [1]},
    {"id": "c", "cluster": "2", "tags": [2]},
    {"id": "d", "cluster": "2", "tags": [2, 3]}]}"#;

const EMPTY_TAGS: &str = r#"{"version": 1, "n": 2, "m": 3, "k": 2, "clusters": ["1", "2"],
  "objects": [{"id": "a", "cluster": "1", "tags": []}, {"id": "b", "cluster": "2", "tags": []}]}"#;

#[test]
fn ilp_with_zero_targets_costs_nothing() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let o = run(&[
        "solve",
        "--instance",
        s(&inst),
        "--method",
        "ilp",
        "--coverage",
        "0,0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cost"], 0);
    assert_eq!(v["status"], "solved");
}

#[test]
fn infeasible_rounding_exits_two() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", EMPTY_TAGS);
    let o = run(&[
        "solve",
        "--instance",
        s(&inst),
        "--method",
        "round",
        "--coverage",
        "1,1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "no feasible solution");
    assert!(v["solution"].is_null());
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("g.json");
    assert!(run(&[
        "gen",
        "--n",
        "60",
        "--m",
        "30",
        "--p",
        "0.1",
        "--seed",
        "5",
        "--out",
        s(&inst)
    ])
    .status
    .success());
    for method in ["round", "round-general", "greedy", "ilp"] {
        let args = [
            "solve",
            "--instance",
            s(&inst),
            "--method",
            method,
            "--coverage-frac",
            "0.5",
            "--seed",
            "9",
        ];
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.code() != Some(1), "{method}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{method}");
    }
}

#[test]
fn missing_flags_are_named() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let o = run(&[
        "solve",
        "--instance",
        s(&inst),
        "--method",
        "dp",
        "--coverage",
        "1,1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--budget"), "{}", stderr(&o));

    let o = run(&["solve", "--instance", s(&inst), "--method", "ilp"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--coverage"));

    let o = run(&["solve", "--method", "ilp", "--coverage", "1,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--instance"));

    let o = run(&[
        "solve",
        "--instance",
        s(&inst),
        "--method",
        "round-overlap",
        "--coverage",
        "1,1",
        "--budget",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--overlap-budget"));
}

#[test]
fn input_errors_exit_one_with_a_locus() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &SMALL.replace("[2, 3]", "[9]"));
    let o = run(&["stats", "--instance", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("objects[3].tags[0]"), "{}", stderr(&o));
    let o = run(&["stats", "--instance", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn every_method_solves_the_small_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    for method in [
        "ilp",
        "round",
        "round-general",
        "round-overlap",
        "dp",
        "greedy",
    ] {
        let sol = dir.path().join(format!("{method}.sol"));
        let o = run(&[
            "solve",
            "--instance",
            s(&inst),
            "--method",
            method,
            "--coverage",
            "2,2",
            "--budget",
            "4",
            "--overlap-budget",
            "1",
            "--solution-out",
            s(&sol),
        ]);
        assert_eq!(o.status.code(), Some(0), "{method}: {}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let written: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
        assert_eq!(
            report["solution"]["descriptors"], written["descriptors"],
            "{method}"
        );
    }
}

#[test]
fn csv_report_has_one_row_per_cluster() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let o = run(&[
        "solve",
        "--instance",
        s(&inst),
        "--method",
        "ilp",
        "--coverage",
        "2,2",
        "--format",
        "csv",
    ]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("method,fingerprint,status,cluster"));
    assert!(lines[1].starts_with("ilp,"));
}

#[test]
fn timing_is_opt_in() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let base = [
        "solve",
        "--instance",
        s(&inst),
        "--method",
        "ilp",
        "--coverage",
        "1,1",
    ];
    assert!(!stdout(&run(&base)).contains("wall_time_ms"));
    let mut timed = base.to_vec();
    timed.push("--timing");
    assert!(stdout(&run(&timed)).contains("wall_time_ms"));
}

#[test]
fn gen_writes_the_requested_header() {
    let o = run(&[
        "gen", "--n", "100", "--m", "100", "--k", "2", "--p", "0.05", "--seed", "1",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (v["n"].as_u64(), v["m"].as_u64(), v["k"].as_u64()),
        (Some(100), Some(100), Some(2))
    );
    assert_eq!(v["objects"].as_array().unwrap().len(), 100);
}

#[test]
fn stats_on_tagless_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", EMPTY_TAGS);
    let o = run(&["stats", "--instance", s(&inst)]);
    let text = stdout(&o);
    for line in ["gamma: 0", "eta: 0", "delta: 0", "cluster sizes: 1, 1"] {
        assert!(text.contains(line), "{text}");
    }
    let o = run(&["stats", "--instance", s(&inst), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["density"], 0.0);
}

#[test]
fn merge_clusters_by_label() {
    let dir = TempDir::new().unwrap();
    let four = dir.path().join("four.json");
    assert!(run(&[
        "gen",
        "--n",
        "80",
        "--m",
        "10",
        "--k",
        "4",
        "--p",
        "0.2",
        "--seed",
        "2",
        "--out",
        s(&four)
    ])
    .status
    .success());
    let two = dir.path().join("two.json");
    let o = run(&[
        "transform",
        "--instance",
        s(&four),
        "--op",
        "merge-clusters",
        "1,2|3,4",
        "--out",
        s(&two),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let count = |path: &Path, labels: &[&str]| {
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        v["objects"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|o| labels.contains(&o["cluster"].as_str().unwrap()))
            .count()
    };
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&two).unwrap()).unwrap();
    assert_eq!(v["k"], 2);
    assert_eq!(v["clusters"], serde_json::json!(["1+2", "3+4"]));
    assert_eq!(count(&two, &["1+2"]), count(&four, &["1", "2"]));
    assert_eq!(count(&two, &["3+4"]), count(&four, &["3", "4"]));

    let o = run(&[
        "transform",
        "--instance",
        s(&four),
        "--op",
        "merge-clusters",
        "1,2|5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["transform", "--instance", s(&four), "--op", "shuffle"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn extend_pairs_labels_pairs() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let o = run(&["transform", "--instance", s(&inst), "--op", "extend-pairs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["m"], 10);
    assert_eq!(v["tag_labels"][4], "0&1");
    assert_eq!(v["objects"][0]["tags"], serde_json::json!([0, 1, 4]));
}

#[test]
fn coverage_sweep_at_zero_budget() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let o = run(&[
        "experiment",
        "--sweep",
        "coverage-vs-cost",
        "--instance",
        s(&inst),
        "--grid",
        "0:0:1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(
        text.lines().next(),
        Some("budget,cluster,covered,cluster_size,coverage_pct,method,seed,status")
    );
    assert!(
        rows.iter().all(|r| r.split(',').nth(4) == Some("0.0")),
        "{text}"
    );
}

#[test]
fn sweeps_ignore_job_count() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("g.json");
    assert!(run(&[
        "gen",
        "--n",
        "40",
        "--m",
        "15",
        "--p",
        "0.15",
        "--seed",
        "3",
        "--out",
        s(&inst)
    ])
    .status
    .success());
    let args = [
        "experiment",
        "--sweep",
        "approx-ratio",
        "--instance",
        s(&inst),
        "--coverage-frac",
        "0.5",
        "--grid",
        "4:10:3",
        "--seeds",
        "0,1",
    ];
    let one = bin()
        .args(args)
        .env("CLUSTER_DESCRIBE_JOBS", "1")
        .output()
        .unwrap();
    let four = bin().args(args).args(["--jobs", "4"]).output().unwrap();
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(stdout(&one).lines().count(), 1 + 3 * 2);

    let cost = run(&[
        "experiment",
        "--sweep",
        "cost-vs-coverage",
        "--instance",
        s(&inst),
        "--fractions",
        "0.2,0.4",
    ]);
    assert!(cost.status.success(), "{}", stderr(&cost));
    assert!(stdout(&cost).starts_with("coverage_frac,min_cost,feasible,method,status\n"));
}

#[test]
fn export_lp_writes_a_model() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", SMALL);
    let o = run(&["export-lp", "--instance", s(&inst), "--coverage", "1,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.contains("Minimize") || text.contains("minimize"),
        "{text}"
    );
    let o = run(&[
        "export-lp",
        "--instance",
        s(&inst),
        "--coverage",
        "1,1",
        "--overlap-budget",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(
        run(&["solve", "--method", "simplex"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
