use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx_stable::json::{read_market, write_market};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_approx-stable"));
    c.env_remove("APPROX_STABLE_ORACLE_LIMIT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, family: &str, params: &str) -> PathBuf {
    let path = dir.join(format!("{family}.json"));
    let o = run(&["gen", "--family", family, "--params", params, "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_example1_at_two_is_stable() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example1", "");
    let mu = write(dir.path(), "mu.json", r#"{"pairs": [["d1", "h1"], ["d3", "h2"]]}"#);
    let args = ["check", "--market", market.to_str().unwrap(), "--matching", mu.to_str().unwrap()];

    let o = run(&[&args[..], &["--alpha", "2"]].concat());
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "stable");

    let o = run(&[&args[..], &["--alpha", "1.99"]].concat());
    assert_eq!(code(&o), 3);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "blocked");
}

#[test]
fn min_alpha_of_example1_matching() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example1", "");
    let mu = write(dir.path(), "mu.json", r#"{"pairs": [["d1", "h1"], ["d3", "h2"]]}"#);
    let o = run(&["min-alpha", "--market", market.to_str().unwrap(), "--matching", mu.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn enumerate_example2_finds_nothing_below_threshold() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example2", "");
    let o = run(&["enumerate", "--market", market.to_str().unwrap(), "--alpha", "1.28"]);
    assert_eq!(code(&o), 3);
    let e: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(e["result"], "none");
    let best = e["best_alpha"].as_f64().unwrap();
    assert!((best - (1.0 + 17f64.sqrt()) / 4.0).abs() < 1e-6);

    let o = run(&["enumerate", "--market", market.to_str().unwrap(), "--alpha", "1.3"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn matroid_lower_bound_market_has_no_stable_matching_below_k() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "thm62", "k=2");
    let o = run(&["enumerate", "--market", market.to_str().unwrap(), "--alpha", "1.9"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains(r#""result": "none""#));
}

#[test]
fn generated_markets_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let families = [
        ("example1", "rendering=knapsack,eps=0.25"),
        ("example2", ""),
        ("thm62", "k=3"),
        ("thm63", "rho=1,eps=0.3,m=2"),
        ("typed", "seed=1"),
        ("overlap", "seed=2"),
        ("budget", "seed=3"),
        ("refugee", "seed=4"),
        ("random", "seed=5,utility=coverage,constraint=knapsack,rho=2,eps=0.1"),
    ];
    for (family, params) in families {
        let path = gen(dir.path(), family, params);
        let text = fs::read_to_string(&path).unwrap();
        let again = write_market(&read_market(&text).unwrap());
        assert_eq!(text, again, "{family}");
    }
}

#[test]
fn gen_to_stdout_matches_file_output() {
    let dir = TempDir::new().unwrap();
    let path = gen(dir.path(), "random", "seed=9");
    let o = run(&["gen", "--family", "random", "--params", "seed=9"]);
    assert_eq!(stdout(&o), fs::read_to_string(path).unwrap());
}

#[test]
fn solve_writes_matching_and_trace() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example1", "rendering=matroid");
    let trace = dir.path().join("trace.json");
    let out = dir.path().join("mu.json");
    let o = run(&[
        "solve",
        "--market",
        market.to_str().unwrap(),
        "--alg",
        "greedy_matroid",
        "--tie-break",
        "seeded:7",
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(t["rounds"].as_u64().unwrap() >= 1);

    // The greedy matching on two matroids is certified 2-stable.
    let o = run(&[
        "check",
        "--market",
        market.to_str().unwrap(),
        "--matching",
        out.to_str().unwrap(),
        "--alpha",
        "2",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn pack_reports_the_optimum() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example1", "");
    let o = run(&["pack", "--market", market.to_str().unwrap(), "--hospital", "h1", "--ground", "d1,d2,d3"]);
    assert_eq!(code(&o), 0);
    let p: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(p["value"].as_f64(), Some(2.0));
    assert_eq!(p["chosen"], serde_json::json!(["d1", "d3"]));
}

#[test]
fn bench_writes_one_row_per_instance() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = run(&["bench", "--seeds", "2", "--doctors", "5", "--threads", "2", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&csv).unwrap();
    let headers = r.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["instance", "algorithm", "certified_alpha", "min_alpha", "runtime_ms", "status"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 15 * 2);
    for row in &rows {
        assert_eq!(&row[5], "ok");
        let certified: f64 = row[2].parse().unwrap();
        let achieved: f64 = row[3].parse().unwrap();
        assert!(achieved <= certified + 1e-9, "{row:?}");
    }
}

#[test]
fn bench_records_timeouts_without_failing() {
    let o = run(&["bench", "--seeds", "1", "--doctors", "12", "--timeout-ms", "0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",timeout") || l.ends_with(",ok")));
    assert!(text.contains(",timeout"));
}

#[test]
fn oracle_limit_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example2", "");
    let o = bin()
        .args(["enumerate", "--market", market.to_str().unwrap(), "--alpha", "1.28"])
        .env("APPROX_STABLE_ORACLE_LIMIT", "assignments=3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stability") && err.contains("limit 3"), "{err}");

    let o = bin()
        .args(["pack", "--market", market.to_str().unwrap(), "--hospital", "h1"])
        .env("APPROX_STABLE_ORACLE_LIMIT", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let market = gen(dir.path(), "example1", "");
    let garbage = write(dir.path(), "bad.json", "{not json");
    let m = market.to_str().unwrap();

    let cases: Vec<Vec<&str>> = vec![
        vec!["no-such-command"],
        vec!["check", "--market", m],
        vec!["enumerate", "--market", garbage.to_str().unwrap()],
        vec!["enumerate", "--market", m, "--alpha", "0.5"],
        vec!["solve", "--market", m, "--alg", "simplex"],
        vec!["solve", "--market", m, "--tie-break", "random"],
        vec!["gen", "--family", "thm62", "--params", "k=two"],
        vec!["gen", "--family", "thm63", "--params", "rho=2,eps=0.3,m=2"],
        vec!["pack", "--market", m, "--hospital", "h9"],
        vec!["enumerate", "--market", "/nonexistent/market.json"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
}
