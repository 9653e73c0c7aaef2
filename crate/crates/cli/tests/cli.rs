use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn exe() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_riskshare"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().unwrap()
}

fn run_to(args: &[&str], out: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    run(&all)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<(String, f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,value,gap"));
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (
                cols[0].to_string(),
                cols[1].parse().unwrap(),
                cols[2].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn golden_outputs_are_reproduced() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(Vec<String>, &str)> = vec![
        (
            vec![
                "value".into(),
                "--spec".into(),
                s(&fixture("finite.toml")).into(),
            ],
            "finite.value.json",
        ),
        (
            vec![
                "value".into(),
                "--spec".into(),
                s(&fixture("aumann.toml")).into(),
            ],
            "aumann.value.json",
        ),
        (
            vec![
                "value".into(),
                "--spec".into(),
                s(&fixture("shapley.toml")).into(),
            ],
            "shapley.value.json",
        ),
        (
            vec![
                "allocate".into(),
                "--spec".into(),
                s(&fixture("finite.toml")).into(),
            ],
            "finite.allocate.json",
        ),
        (
            vec![
                "allocate".into(),
                "--spec".into(),
                s(&fixture("aumann.toml")).into(),
            ],
            "aumann.allocate.json",
        ),
        (
            vec![
                "allocate".into(),
                "--spec".into(),
                s(&fixture("shapley.toml")).into(),
            ],
            "shapley.allocate.json",
        ),
        (
            [
                "value",
                "--spec",
                s(&fixture("mixed.toml")),
                "--samples",
                "25",
                "--seed",
                "11",
            ]
            .map(String::from)
            .to_vec(),
            "mixed.value.json",
        ),
        (
            [
                "pareto",
                "--spec",
                s(&fixture("finite.toml")),
                "--alloc",
                s(&golden("finite.allocate.json")),
            ]
            .map(String::from)
            .to_vec(),
            "finite.pareto.json",
        ),
        (
            [
                "sweep",
                "--spec",
                s(&fixture("sweep.toml")),
                "--gamma-grid",
                "1,1.5,2,4,10,20",
            ]
            .map(String::from)
            .to_vec(),
            "sweep.csv",
        ),
        (
            [
                "nonattain",
                "--spec",
                s(&fixture("aumann.toml")),
                "--refinements",
                "10,100,1000",
            ]
            .map(String::from)
            .to_vec(),
            "aumann.nonattain.csv",
        ),
    ];
    for (args, name) in cases {
        let out = dir.path().join(name);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run_to(&args, &out);
        assert!(
            o.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(
            fs::read(&out).unwrap(),
            fs::read(golden(name)).unwrap(),
            "{name} differs from golden"
        );
    }
}

#[test]
fn finite_value_matches_entropic_closed_form() {
    let rec = json(&golden("finite.value.json"));
    // Γ = 0.5 + 1 + 2.5 = 4
    let p = [0.2, 0.3, 0.5];
    let x = [3.0, -1.0, 0.5];
    let want = 4.0
        * p.iter()
            .zip(x)
            .map(|(p, x)| p * (x / 4.0f64).exp())
            .sum::<f64>()
            .ln();
    assert!((rec["value"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(rec["attainment"], "attained");
    let rows = rec["allocation"].as_array().unwrap();
    let first: Vec<f64> = rows[0]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (a, b) in first.iter().zip(x) {
        assert!((a - 0.5 * b / 4.0).abs() < 1e-15);
    }
}

#[test]
fn inflated_allocation_is_an_indicator() {
    let rec = json(&golden("aumann.allocate.json"));
    let rows = rec["allocation"].as_array().unwrap();
    // the first midpoint carries the smallest level; weight 1/50
    let first: Vec<f64> = rows[0]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(first, vec![0.0, 50.0]);
    assert!(rows[1..].iter().all(|r| r
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64() == Some(0.0))));
    let cert = &rec["certificate"];
    assert!(cert["gap"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(
        code(&["value", "--spec", s(&fixture("malformed.toml"))]),
        Some(2)
    );
    assert_eq!(
        code(&["value", "--spec", s(&fixture("ill_posed.toml"))]),
        Some(4)
    );
    assert_eq!(
        code(&["allocate", "--spec", s(&fixture("mixed.toml"))]),
        Some(5)
    );
    assert_eq!(
        code(&["value", "--spec", "/nonexistent/spec.toml"]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "sweep",
            "--spec",
            s(&fixture("finite.toml")),
            "--gamma-grid",
            "0.5,2"
        ]),
        Some(2)
    );
    assert_eq!(
        code(&["nonattain", "--spec", s(&fixture("finite.toml"))]),
        Some(2)
    );
}

#[test]
fn malformed_message_names_field_and_label() {
    let o = run(&["value", "--spec", s(&fixture("malformed.toml"))]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("agents[1] (bob).weight"), "{err}");
}

#[test]
fn digest_detects_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    let text = fs::read_to_string(fixture("finite.toml")).unwrap();
    fs::write(&spec, &text).unwrap();
    let a = dir.path().join("a.json");
    run_to(&["value", "--spec", s(&spec)], &a);
    fs::write(&spec, text.replace("gamma = 2.5", "gamma = 2.25")).unwrap();
    let b = dir.path().join("b.json");
    run_to(&["value", "--spec", s(&spec)], &b);
    assert_ne!(json(&a)["input_digest"], json(&b)["input_digest"]);
    assert_eq!(
        json(&a)["input_digest"],
        json(&golden("finite.value.json"))["input_digest"]
    );
}

#[test]
fn pareto_flags_proportional_split() {
    let dir = tempfile::tempdir().unwrap();
    let alloc = dir.path().join("alloc.json");
    // x / μ(A) with three unit agents
    fs::write(&alloc, "[[1.0, -0.3333333333333333, 0.16666666666666666], [1.0, -0.3333333333333333, 0.16666666666666666], [1.0, -0.33333333333333337, 0.16666666666666669]]").unwrap();
    let out = dir.path().join("p.json");
    let o = run_to(
        &[
            "pareto",
            "--spec",
            s(&fixture("finite.toml")),
            "--alloc",
            s(&alloc),
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = json(&out);
    assert_eq!(rec["pareto"]["verdict"], "inefficient");
    assert!(rec["pareto"]["excess"].as_f64().unwrap() > 1e-3);
    assert!(rec["pareto"]["witness"].is_array());
    assert_eq!(
        json(&golden("finite.pareto.json"))["pareto"]["verdict"],
        "efficient"
    );
}

#[test]
fn sweep_is_nondecreasing_and_reaches_the_maximum() {
    let rows = csv_rows(&golden("sweep.csv"));
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
    assert!(rows.iter().skip(1).all(|r| r.2 >= 0.0));
    assert_eq!(rows.last().unwrap().1, 5.0);
}

#[test]
fn nonattain_gaps_are_positive_and_decreasing() {
    let rows = csv_rows(&golden("aumann.nonattain.csv"));
    let gaps: Vec<f64> = rows.iter().map(|r| r.2).collect();
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(rows[0].0, "10");
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    run_to(
        &["value", "--spec", s(&fixture("finite.toml")), "--timing"],
        &out,
    );
    assert!(json(&out)["timing_ms"].is_number());
    assert!(json(&golden("finite.value.json"))
        .get("timing_ms")
        .is_none());
}

#[test]
fn stdout_when_no_out_path() {
    let o = run(&["value", "--spec", s(&fixture("finite.toml"))]);
    assert!(o.status.success());
    assert_eq!(o.stdout, fs::read(golden("finite.value.json")).unwrap());
}
