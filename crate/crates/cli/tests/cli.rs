use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icluster"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn check(name: &str, v: &Value) {
    let errors: Vec<String> = schema(name).iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
    if let Some(c) = v.get("config") {
        let errors: Vec<String> = schema("run_config").iter_errors(c).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "config: {errors:?}");
    }
}

fn clusters(report: &Value) -> Vec<String> {
    report["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["class"] == "cluster")
        .map(|c| c["point"][0].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn analyze_examples() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["analyze", "--seq", "char:powers2", "--ideal", "density-zero", "--horizon", "65536"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(d.path(), "analyze.json");
    check("analyze", &v);
    assert_eq!(clusters(&v["result"]["gamma"]), ["0"]);
    assert_eq!(clusters(&v["result"]["limit_points"]), ["0", "1"]);
    assert!(std::fs::read_to_string(d.path().join("analyze.csv")).unwrap().starts_with("set,candidate,"));

    let o = run(d.path(), &["analyze", "--seq", "harmonic", "--ideal", "fin", "--horizon", "65536"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read(d.path(), "analyze.json");
    assert_eq!(clusters(&v["result"]["gamma"]), ["0"]);
    assert_eq!(clusters(&v["result"]["limit_points"]), ["0"]);

    let o = run(d.path(), &["analyze", "--seq", "char:evens", "--ideal", "density-zero", "--mode", "lambda", "--q", "1/4", "--horizon", "65536"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read(d.path(), "analyze.json");
    check("analyze", &v);
    assert_eq!(clusters(&v["result"][0]), ["0", "1"]);

    let o = run(d.path(), &["analyze", "--seq", "harmonic", "--ideal", "fin", "--mode", "convergence", "--ell", "0", "--horizon", "65536"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read(d.path(), "analyze.json");
    check("analyze", &v);
    assert_eq!(v["result"]["verdict"], "converges");
}

#[test]
fn witness_build_and_verify() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["witness", "build", "--ideal", "density-zero", "--q", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read(d.path(), "witness.json");
    check("witness", &v);
    let iota: Vec<u64> = v["result"]["iota"].as_array().unwrap().iter().take(5).map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(iota, [2, 4, 8, 16, 32]);

    let o = run(d.path(), &["witness", "verify", "--ideal", "fin-x-fin", "--horizon", "20000", "--trials", "5", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(d.path(), "verify.json");
    check("verify", &v);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn preserve_examples() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["preserve", "sigma", "--seq", "char:evens", "--ideal", "density-zero", "--mode", "preserve", "--horizon", "65536"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout["summary"]["audit"], "PASS");
    check("preserve", &read(d.path(), "preserve.json"));
    check("map", &read(d.path(), "map.json"));
    let map: icluster::transforms::SubsequenceMap = serde_json::from_value(read(d.path(), "map.json")).unwrap();
    assert!(map.table().windows(2).all(|p| p[0] < p[1]));

    let o = run(d.path(), &["preserve", "pi", "--seq", "char:powers2", "--mode", "add", "--ell", "1", "--horizon", "65536"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    check("preserve", &read(d.path(), "preserve.json"));
    let map: icluster::transforms::PermutationMap = serde_json::from_value(read(d.path(), "map.json")).unwrap();
    map.validate().unwrap();
}

#[test]
fn failures_carry_error_json_and_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let cases: [(&[&str], i32, &str); 5] = [
        (&["preserve", "sigma", "--seq", "char:powers2", "--horizon", "65536"], 3, "HypothesisFailed"),
        (&["analyze", "--seq", "nowhere"], 1, "UnknownSequence"),
        (&["analyze", "--schedule", "1/4,1/2"], 1, "InvalidParameter"),
        (&["analyze", "--no-such-flag"], 1, "Usage"),
        (&["game", "run", "--ideal", "fin-x-fin", "--ell", "1"], 3, "NotAnalyticP"),
    ];
    for (args, code, kind) in cases {
        let o = run(d.path(), args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let e: Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
        check("error", &e);
        assert_eq!(e["error"], kind);
    }
}

#[test]
fn undecided_heavy_analysis_exits_two() {
    let d = tempfile::tempdir().unwrap();
    // a single cut leaves every trend undetermined on a fine grid
    let o = run(d.path(), &["analyze", "--seq", "rationals", "--ideal", "density-zero", "--mode", "gamma", "--horizon", "64", "--schedule", "1/2,1/4,1/8,1/16,1/32,1/64", "--pitch", "1/64"]);
    let v = read(d.path(), "analyze.json");
    check("analyze", &v);
    let cands = v["result"]["candidates"].as_array().unwrap();
    let undecided = cands.iter().filter(|c| c["class"] == "undecided").count();
    let want = if 2 * undecided > cands.len() { 2 } else { 0 };
    assert_eq!(o.status.code(), Some(want));
}

#[test]
fn games_ideals_and_samples_validate() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["game", "run", "--seq", "char:evens", "--ell", "0", "--q", "1/4", "--rounds", "10", "--seed", "7", "--horizon", "100000", "--kind", "pi"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read(d.path(), "game.json");
    check("game", &v);
    assert_eq!(v["result"]["verdict"]["outcome"], "win");

    let o = run(d.path(), &["game", "run", "--seq", "char:powers2", "--ell", "1", "--seed", "7", "--horizon", "100000"]);
    assert_eq!(o.status.code(), Some(3));
    let v = read(d.path(), "game.json");
    check("game", &v);
    assert_eq!(v["result"]["verdict"]["error"], "SupplyExhausted");

    assert_eq!(run(d.path(), &["ideals", "list"]).status.code(), Some(0));
    check("ideals", &read(d.path(), "ideals.json"));

    let o = run(d.path(), &["sample", "--seq", "char:evens", "--horizon", "4096", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read(d.path(), "sample.json");
    check("sample", &v);
    assert!(v["banner"].as_str().unwrap().starts_with("HEURISTIC"));
    assert!(std::fs::read_to_string(d.path().join("sample.csv")).unwrap().starts_with("# HEURISTIC"));
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, r#"{"sequence": "harmonic", "ideal": "fin", "horizon": 4096, "seed": 11, "schedule": ["1/2", "1/4"], "pitch": "1/4"}"#).unwrap();
    let o = run(d.path(), &["analyze", "--config", cfg.to_str().unwrap(), "--mode", "gamma", "--seed", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(d.path(), "analyze.json");
    check("analyze", &v);
    assert_eq!(v["config"]["sequence"], "harmonic");
    assert_eq!(v["config"]["horizon"], 4096);
    assert_eq!(v["config"]["seed"], 12);
    assert_eq!(v["seed"], 12);
    assert_eq!(v["config"]["command"], "analyze");

    // the embedded config replays the run
    let replay = d.path().join("replay.json");
    std::fs::write(&replay, v["config"].to_string()).unwrap();
    let first = std::fs::read(d.path().join("analyze.json")).unwrap();
    let o = run(d.path(), &["analyze", "--config", replay.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(d.path().join("analyze.json")).unwrap(), first);

    std::fs::write(&cfg, r#"{"horizn": 4096}"#).unwrap();
    assert_eq!(run(d.path(), &["analyze", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn timestamps_stay_in_the_sidecar() {
    let d = tempfile::tempdir().unwrap();
    run(d.path(), &["ideals", "list"]);
    let meta = read(d.path(), "ideals-list.meta.json");
    assert!(meta["started_unix"].as_u64().unwrap() > 0);
    let primary = std::fs::read_to_string(d.path().join("ideals.json")).unwrap();
    assert!(!primary.contains("unix"));
}
