use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftgame")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_lemmas_pass() {
    for lemma in ["lemma1", "lemma2", "lemma3"] {
        let out = run(&["verify", lemma]);
        assert!(out.status.success(), "{lemma}: {}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.ends_with(&format!("{lemma}: PASS\n")));
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn verify_json_report() {
    let v = json(&run(&["verify", "lemma2", "--json"]));
    assert_eq!(v["lemma"], "lemma2");
    assert_eq!(v["pass"], true);
    assert!(v.get("timing_ms").is_none());
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys[0], "provenance");
}

#[test]
fn timing_only_on_request() {
    let v = json(&run(&["verify", "lemma3", "--json", "--timing"]));
    assert!(v["timing_ms"].is_u64());
}

#[test]
fn lemma1_prints_the_twin_table() {
    let text = String::from_utf8(run(&["verify", "lemma1"]).stdout).unwrap();
    assert!(text.contains("B1") && text.contains("B2"));
}

#[test]
fn exact_regret_of_the_sanity_profile() {
    let out = run(&["regret", "--profile", data("constant_b0a0.json").to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["kind"], "exact");
    let r = &v["regret"];
    assert_eq!(r["g0"]["harsanyi"]["exact"], "1000");
    assert_eq!(r["r1"]["harsanyi"]["exact"], "0");
    assert_eq!(r["r2"]["harsanyi"]["exact"], "0");
    assert_eq!(r["parity_violation_mass"]["exact"], "1/2");
    assert_eq!(r["g0"]["witness"]["depth"], 1);
    assert_eq!(r["g0"]["witness"]["code"], 1);
}

#[test]
fn monte_carlo_regret_is_seeded() {
    let path = data("constant_b0a0.json");
    let args = ["regret", "--profile", path.to_str().unwrap(), "--mc", "2000", "--seed", "5"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let sequential = run(&[&args[..], &["--sequential"]].concat());
    assert_eq!(a.stdout, sequential.stdout);
    assert_eq!(json(&a)["kind"], "estimate");
}

#[test]
fn qseq_is_csv() {
    let out = run(&["qseq", "--profile", data("constant_b0a0.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("depth,q,max_r,q_approx,max_r_approx"));
    assert_eq!(lines.next().map(|l| l.split(',').nth(1)), Some(Some("0")));
}

#[test]
fn pyramid_colouring_verifies() {
    let out = run(&["colour", "--pyramid", "6", "--seed", "3", "--verify"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["nodes"], 127);
    assert_eq!(v["verification"]["pass"], true);
    assert_eq!(v["colouring"].as_str().unwrap().len(), 127);
    let alt = run(&["colour", "--pyramid", "6", "--seed", "3", "--verify", "--reading", "alternate"]);
    assert!(alt.status.success());
}

#[test]
fn xy_pair_is_infeasible_with_certificate() {
    let out = run(&["colour", "--graph", data("xy_pair.json").to_str().unwrap(), "--verify"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["status"], "infeasible");
    assert_eq!(v["forced"][0]["node"], "y");
    assert_eq!(v["forced"][0]["colour"], 1);
    assert_eq!(v["verification"]["brute_force_infeasible"], true);
    assert!(v["narrative"].as_str().unwrap().contains("differently from itself"));
}

#[test]
fn xy_pair_solves_with_mixing() {
    let out = run(&["solve", "--graph", data("xy_pair.json").to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["solution"]["regret"]["max"]["exact"], "0");
    assert!(!v["solution"]["mixing_nodes"].as_array().unwrap().is_empty());
}

#[test]
fn search_writes_a_profile() {
    let dir = std::env::temp_dir().join(format!("shiftgame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("best.json");
    let out = run(&["search", "--grid", "3", "--profile-out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["search"]["best"]["max_regret"]["exact"].is_string());
    assert_eq!(v["search"]["pure_corner_best"]["max_regret"]["exact"], "150");
    let again = run(&["regret", "--profile", path.to_str().unwrap()]);
    assert!(again.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn errors_map_to_exit_codes() {
    assert_eq!(run(&["regret", "--profile", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["colour"]).status.code(), Some(2));
    assert_eq!(run(&["colour", "--pyramid", "40"]).status.code(), Some(3));
    let path = data("constant_b0a0.json");
    assert_eq!(run(&["regret", "--profile", path.to_str().unwrap(), "--cap", "9"]).status.code(), Some(2));
}
