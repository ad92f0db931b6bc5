use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(task: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.join(format!("{task}-input.toml"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_spectra-lab"))
        .arg(task)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(out: &Path, task: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{task}.json"))).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        v => v.as_f64().unwrap(),
    }
}

const OSCILLATOR: &str = r#"
[grid]
dim = 1
radius = 10.0
spacing = 2e-3

[operator.potential]
family = "power"
alpha = 2.0

[spectrum]
count = 5
"#;

#[test]
fn oscillator_spectrum_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("spectrum", OSCILLATOR, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(dir.path(), "spectrum");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["seed"], 0);
    let vals: Vec<f64> = r["payload"]["eigenvalues"].as_array().unwrap().iter().map(num).collect();
    for (k, v) in vals.iter().enumerate() {
        assert!((v - (2 * k + 1) as f64).abs() < 1e-3, "{vals:?}");
    }
    assert!(r["config"].as_str().unwrap().contains("eig_tol"), "defaults are echoed");
}

#[test]
fn rerun_is_bit_identical_and_reads_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let first = run("spectrum", OSCILLATOR, dir.path(), &["--seed", "5"]);
    assert!(stderr(&first).contains("cache hits 0, misses 1"), "{}", stderr(&first));
    let a = std::fs::read(dir.path().join("spectrum.json")).unwrap();
    let c = std::fs::read(dir.path().join("spectrum.csv")).unwrap();
    let second = run("spectrum", OSCILLATOR, dir.path(), &["--seed", "5"]);
    assert_eq!(second.status.code(), Some(0));
    assert!(stderr(&second).contains("cache hits 1, misses 0, spot checks 1"), "{}", stderr(&second));
    assert_eq!(a, std::fs::read(dir.path().join("spectrum.json")).unwrap());
    assert_eq!(c, std::fs::read(dir.path().join("spectrum.csv")).unwrap());
    assert!(String::from_utf8(c).unwrap().starts_with("# task=spectrum schema_version=1 seed=5 "));
}

#[test]
fn seeded_tasks_repeat_without_cache() {
    let cfg = r#"
[grid]
dim = 1
radius = 5.0
spacing = 0.1

[output]
cache = false

[strichartz]
samples = 5
"#;
    let dir = tempfile::tempdir().unwrap();
    run("strichartz", cfg, dir.path(), &["--seed", "3"]);
    let a = std::fs::read(dir.path().join("strichartz.json")).unwrap();
    let o = run("strichartz", cfg, dir.path(), &["--seed", "3"]);
    assert!(!dir.path().join(".cache").exists());
    assert_eq!(a, std::fs::read(dir.path().join("strichartz.json")).unwrap(), "{}", stderr(&o));
    run("strichartz", cfg, dir.path(), &["--seed", "4"]);
    assert_ne!(a, std::fs::read(dir.path().join("strichartz.json")).unwrap());
}

#[test]
fn weighted_comb_av_table_increases() {
    let cfg = r#"
[grid]
dim = 1
spacing = 0.05

[operator.measure]
family = "comb"
weight = "abs-index"

[av-sweep]
lambda = 4.0
n = [3.0, 6.0, 9.0]
"#;
    let dir = tempfile::tempdir().unwrap();
    let o = run("av-sweep", cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(dir.path(), "av-sweep");
    let av: Vec<f64> = r["payload"]["rows"].as_array().unwrap().iter().map(|row| num(&row["av"])).collect();
    assert!(av.windows(2).all(|w| w[1] > w[0]), "{av:?}");
    assert_eq!(r["payload"]["nondecreasing"], true);
}

#[test]
fn probe_reports_counts_per_radius() {
    let cfg = r#"
[grid]
dim = 1
spacing = 0.01

[operator.potential]
family = "power"
alpha = 2.0

[probe]
radii = [6.0, 8.0, 10.0]
lambdas = [20.0]
"#;
    let dir = tempfile::tempdir().unwrap();
    let o = run("probe", cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = &json(dir.path(), "probe")["payload"]["verdicts"][0];
    assert_eq!(v["counts"], serde_json::json!([10, 10, 10]));
    assert_eq!(v["classification"], "discrete-below-lambda");
}

#[test]
fn thin_profile_csv_has_cube_rows() {
    let cfg = r#"
[grid]
dim = 2
radius = 4.0
spacing = 0.1

[operator.potential]
family = "product-square"

[thin-profile]
levels = [1.0]
"#;
    let dir = tempfile::tempdir().unwrap();
    let o = run("thin-profile", cfg, dir.path(), &["--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("thin-profile.json").exists());
    let text = std::fs::read_to_string(dir.path().join("thin-profile.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["level", "k1", "k2", "cube_norm", "complete"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 81);
    let origin = rows.iter().find(|r| &r[1] == "0" && &r[2] == "0").unwrap();
    assert!(origin[3].parse::<f64>().unwrap() > 0.9);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let two_radii = "[grid]\ndim = 1\nspacing = 0.1\n[probe]\nradii = [1.0, 2.0]\nlambdas = [1.0]\n";
    let o = run("probe", two_radii, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("probe.radii: >= 3 radii required"), "{}", stderr(&o));

    let negative_tol = format!("{OSCILLATOR}\n[solver]\ncauchy_tol = -1.0\n");
    let o = run("spectrum", &negative_tol, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solver.cauchy_tol"), "{}", stderr(&o));

    let unknown = format!("{OSCILLATOR}\n[spectrum.extra]\nx = 1\n");
    assert_eq!(run("spectrum", &unknown, dir.path(), &[]).status.code(), Some(2));
    let o = run("molchanov", OSCILLATOR, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2), "molchanov without a measure");
    assert!(!dir.path().join("spectrum.json").exists(), "no report on config errors");
}

#[test]
fn computation_failure_is_flushed_with_marker() {
    let cfg = "[grid]\ndim = 1\nradius = 5.0\nspacing = 0.1\n[solver]\ndense_budget = 20\n";
    let dir = tempfile::tempdir().unwrap();
    let o = run("super-poincare", cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let r = json(dir.path(), "super-poincare");
    assert_eq!(r["status"], "failed");
    assert!(r["error"].as_str().unwrap().contains("dense budget"), "{}", r["error"]);
    assert_eq!(r["payload"]["rows"], serde_json::json!([]));
    let csv = std::fs::read_to_string(dir.path().join("super-poincare.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("status=failed"));
}
