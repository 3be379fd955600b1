use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const UNIT_F2: &str = r#"{
    "rank": 2,
    "potentials": {
        "heavy": {"weights": {"a": 1, "A": 1, "b": 2, "B": 2}}
    },
    "walks": {"skew": {"steps": {"a": 0.4, "A": 0.1, "b": 0.3, "B": 0.2}}},
    "green": {"walk": "skew", "paths": 20000, "cylinders": ["a", "Ba"], "pairs": 5, "pair_paths": 2000},
    "gpscheck": {"potentials": ["word", "heavy"], "samples": 500}
}"#;

fn pslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pslab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), config).unwrap();
    dir
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exponent_report_for_unit_weights() {
    let dir = setup(UNIT_F2);
    let o = pslab(dir.path(), &["exponent", "config.json", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&dir.path().join("out/exponent/report.json"));
    let delta = r["delta_spectral"].as_f64().unwrap();
    assert!((delta - 3f64.ln()).abs() < 1e-9);
    assert!((r["delta_fit"].as_f64().unwrap() - delta).abs() < 0.01);
    assert_eq!(r["verdict"], "DIVERGENT");
    let m = read_json(&dir.path().join("out/exponent/MANIFEST.json"));
    assert_eq!(m["subcommand"], "exponent");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_seconds"].as_f64().is_some());
    let csv = std::fs::read_to_string(dir.path().join("out/exponent/growth.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("R,N(R),partial_sum,s"));
    assert!(csv.lines().any(|l| l.starts_with("3,53,")), "{csv}");
}

#[test]
fn shadowlemma_writes_sorted_csv_and_band() {
    let dir = setup(UNIT_F2);
    let o = pslab(dir.path(), &["shadowlemma", "config.json", "--out", "out", "--set", "shadowlemma.nesting_radius=null"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/shadowlemma/shadows.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gamma,length,magnitude,shadow_mass,normalized_mass"));
    let rows: Vec<&str> = lines.collect();
    // γ ranges over the ball of radius 10 minus the identity
    assert_eq!(rows.len(), 2 * 3usize.pow(10) - 2);
    let s = read_json(&dir.path().join("out/shadowlemma/summary.json"));
    assert!(s["band"]["min"].as_f64().unwrap() > 0.0);
    assert!(s["nesting"].is_null());
}

#[test]
fn missing_letter_exits_2_and_names_it() {
    let dir = setup(&UNIT_F2.replace(r#", "B": 2}"#, "}"));
    let o = pslab(dir.path(), &["exponent", "config.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("letter `B`"), "{}", stderr(&o));
}

#[test]
fn syntax_error_reports_line() {
    let dir = setup("{\n  \"rank\": 2,\n  \"potentials\": {\n}");
    let o = pslab(dir.path(), &["validate", "config.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn validate_reports_ok_and_diagnostics() {
    let dir = setup(UNIT_F2);
    let o = pslab(dir.path(), &["validate", "config.json"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");

    let o = pslab(dir.path(), &["validate", "config.json", "--set", "potentials.heavy.weights.b=-2"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("NonPositiveWeight") && e.contains("potentials.heavy.weights.b"), "{e}");

    let o = pslab(dir.path(), &["validate", "config.json", "--set", "convexity.lambdas=[0.5, 1.5]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("convexity.lambdas[1]"), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_1_naming_the_operation() {
    let dir = setup(UNIT_F2);
    let o = pslab(dir.path(), &["psmeasure", "config.json", "--out", "out", "--set", "psmeasure.depth=20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("patterson_construct"), "{}", stderr(&o));
}

#[test]
fn seeded_experiments_require_a_seed() {
    let dir = setup(UNIT_F2);
    let o = pslab(dir.path(), &["green", "config.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

fn report_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "MANIFEST.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reports_are_byte_identical_across_worker_counts() {
    let dir = setup(UNIT_F2);
    for sub in ["green", "gpscheck"] {
        let mut runs = Vec::new();
        for (i, workers) in ["1", "4", "4"].iter().enumerate() {
            let out = format!("out{i}");
            let o = pslab(dir.path(), &[sub, "config.json", "--seed", "7", "--workers", workers, "--out", &out]);
            assert!(o.status.success(), "{}", stderr(&o));
            runs.push(report_bodies(&dir.path().join(&out).join(sub)));
        }
        assert!(!runs[0].is_empty());
        assert_eq!(runs[0], runs[1], "{sub}");
        assert_eq!(runs[1], runs[2], "{sub}");
        let m = read_json(&dir.path().join("out0").join(sub).join("MANIFEST.json"));
        assert_eq!(m["seed"], 7);
        assert_eq!(m["workers"], 1);
    }
}
