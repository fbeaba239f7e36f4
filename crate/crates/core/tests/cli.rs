use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gridsens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridsens")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Scalar state, two links: mean-square stable iff
/// `0.25 + σ₁² + 0.25 σ₂² < 1`.
const SCALAR_TWO_LINK: &str = r#"{"a": [[0.5]], "links": [
    {"id": "L1", "b": [1], "c": [1], "sigma": 0.1},
    {"id": "L2", "b": [1], "c": [0.5], "sigma": 0.1}]}"#;

const SINGLE_LINK: &str = r#"{"a": [[0.4, 0.2], [0.0, -0.3]], "links": [
    {"id": "only", "b": [1, 1], "c": [0.6, 1.2]}]}"#;

/// The link output never sees the injected state.
const INVISIBLE_LINK: &str = r#"{"a": [[0.5, 0.0], [0.0, 0.5]], "links": [
    {"id": "ghost", "b": [0, 1], "c": [1, 0]}]}"#;

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&gridsens(&["check", "--example", "1"])), 0);
    assert_eq!(code(&gridsens(&["--help"])), 0);

    // malformed input
    assert_eq!(code(&gridsens(&["bogus"])), 1);
    assert_eq!(code(&gridsens(&["check", "--network", "/nonexistent/net.json"])), 1);
    let broken = write(tmp.path(), "broken.json", "{\"a\": [[0.5]], \"links\": [");
    assert_eq!(code(&gridsens(&["check", "--network", &broken])), 1);
    let bad_case = write(tmp.path(), "bad.m", "mpc.bus = [1 2;\n2 1\n");
    assert_eq!(code(&gridsens(&["check", "--case", &bad_case])), 1);

    // analysis failures
    let ghost = write(tmp.path(), "ghost.json", INVISIBLE_LINK);
    assert_eq!(code(&gridsens(&["check", "--network", &ghost])), 2);
    let out = tmp.path().join("ghost");
    assert_eq!(code(&gridsens(&["analyze", "--network", &ghost, "--out", out.to_str().unwrap()])), 2);
    let unstable = write(tmp.path(), "unstable.json", r#"{"a": [[1.5]], "links": [{"id": "L", "b": [1], "c": [1]}]}"#);
    assert_eq!(code(&gridsens(&["check", "--network", &unstable])), 2);
}

#[test]
fn region_needs_two_links() {
    let tmp = TempDir::new().unwrap();
    let single = write(tmp.path(), "single.json", SINGLE_LINK);
    let out = tmp.path().join("r");
    let res = gridsens(&["region", "--network", &single, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 2, "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn analyze_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let res = gridsens(&["analyze", "--example", "1", "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        (fs::read(dir.join("sensitivity.csv")).unwrap(), fs::read(dir.join("report.txt")).unwrap(), res.stdout)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn simulate_is_deterministic_for_a_seed() {
    let args = ["simulate", "--example", "2", "--sigma", "0.05,0.05", "--trials", "200", "--horizon", "60", "--seed", "9"];
    let a = gridsens(&args);
    let b = gridsens(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn single_link_f_is_s_over_output_norm() {
    let tmp = TempDir::new().unwrap();
    let net = write(tmp.path(), "single.json", SINGLE_LINK);
    let dir = tmp.path().join("out");
    let res = gridsens(&["analyze", "--network", &net, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&fs::read_to_string(dir.join("sensitivity.csv")).unwrap());
    assert_eq!(rows.len(), 1);
    let f: f64 = rows[0][1].parse().unwrap();
    let s: f64 = rows[0][2].parse().unwrap();
    let c_norm = (0.6f64 * 0.6 + 1.2 * 1.2).sqrt();
    assert!((f - s / c_norm).abs() <= 1e-12 * f, "F = {f}, S = {s}");
    assert_eq!(rows[0][5], "1");
}

#[test]
fn scalar_boundary_is_an_ellipse() {
    let tmp = TempDir::new().unwrap();
    let net = write(tmp.path(), "toy.json", SCALAR_TWO_LINK);
    let dir = tmp.path().join("region");
    let res = gridsens(&["region", "--network", &net, "--out", dir.to_str().unwrap(), "--angles", "37"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&fs::read_to_string(dir.join("boundary.csv")).unwrap());
    assert_eq!(rows.len(), 37);
    for row in rows {
        let s1: f64 = row[1].parse().unwrap();
        let s2: f64 = row[2].parse().unwrap();
        let level = s1 * s1 + 0.25 * s2 * s2;
        assert!((level - 0.75).abs() <= 1e-4, "({s1}, {s2}) gives {level}");
    }
    let rects = fs::read_to_string(dir.join("rectangles.csv")).unwrap();
    for name in ["uniform", "f_scaled", "s_scaled"] {
        assert!(rects.lines().any(|l| l.starts_with(name)), "{rects}");
    }
}

#[test]
fn noiseless_simulation_decays_at_twice_the_log_radius() {
    let tmp = TempDir::new().unwrap();
    let net = write(tmp.path(), "toy.json", SCALAR_TWO_LINK);
    let res = gridsens(&["simulate", "--network", &net, "--sigma", "0,0", "--trials", "100", "--horizon", "50"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    let rate: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# rate="))
        .expect("rate footer")
        .parse()
        .unwrap();
    assert!((rate - 2.0 * 0.5f64.ln()).abs() <= 1e-9, "rate {rate}");
    assert!(text.contains("# classification=decay"));
    assert!(text.contains("# operator_classification=decay"));
}

#[test]
fn bundled_case_checks_and_names_missing_contingencies() {
    let tmp = TempDir::new().unwrap();
    let res = gridsens(&["check"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("state dimension: 18"));

    let dir = tmp.path().join("a");
    let res = gridsens(&["analyze", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("contingency"));

    let config = write(tmp.path(), "cfg.json", r#"{"contingencies": ["37-25", "36-23"]}"#);
    let res = gridsens(&["analyze", "--config", &config, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&fs::read_to_string(dir.join("sensitivity.csv")).unwrap());
    let ids: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ids, ["37-25", "36-23"]);

    let typo = write(tmp.path(), "typo.json", r#"{"contingencies": ["37-26"]}"#);
    let res = gridsens(&["analyze", "--config", &typo, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("37-26"));

    let coarse = write(tmp.path(), "coarse.json", r#"{"delta_t": 10, "contingencies": ["37-25"]}"#);
    assert_eq!(code(&gridsens(&["check", "--config", &coarse])), 2);
}
