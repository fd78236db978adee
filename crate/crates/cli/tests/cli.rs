//! End-to-end runs of the binary against golden outputs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn two_player() -> String {
    path("../core/games/two_player.json").to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_checkmate")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(path(&format!("tests/golden/{name}"))).unwrap()
}

#[test]
fn weak_immunity_report() {
    let (code, out, _) = run(&[&two_player(), "--weak_immunity", "--counterexamples", "--preconditions"]);
    assert_eq!(code, 1);
    assert_eq!(out, golden("weak_immunity.txt"));
}

#[test]
fn embedded_backend_gives_the_same_report() {
    let (code, out, _) =
        run(&[&two_player(), "--weak_immunity", "--counterexamples", "--preconditions", "--solver", "embedded"]);
    assert_eq!(code, 1);
    assert_eq!(out, golden("weak_immunity.txt"));
}

#[test]
fn all_counterexamples_report() {
    let (code, out, _) = run(&[&two_player(), "--all_counterexamples"]);
    assert_eq!(code, 1);
    assert_eq!(out, golden("two_player_all.txt"));
}

#[test]
fn strategies_on_a_secured_game() {
    let game = path("tests/golden/two_player_secured.json");
    let (code, out, _) = run(&[game.to_str().unwrap(), "--strategies", "--weak_immunity", "--weaker_immunity"]);
    assert_eq!(code, 0);
    assert_eq!(out, golden("secured_strategies.txt"));
}

#[test]
fn hyphenated_aliases_are_accepted() {
    let (code, out, _) = run(&[&two_player(), "--weak-immunity", "--all-cases"]);
    assert_eq!(code, 1);
    assert!(out.contains("Case [(< b 0.0)] violates property."));
}

#[test]
fn empty_selection_runs_all_properties_in_order() {
    let (_, out, _) = run(&[&two_player()]);
    let pos: Vec<usize> = ["WEAK IMMUNITY\n", "WEAKER IMMUNITY\n", "COLLUSION RESILIENCE\n", "PRACTICALITY\n"]
        .iter()
        .map(|h| out.find(h).expect(h))
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

fn cases_from_text(out: &str) -> BTreeSet<(String, BTreeSet<String>, bool)> {
    let mut property = String::new();
    let mut found = BTreeSet::new();
    for line in out.lines() {
        if !line.is_empty() && line == line.to_uppercase() && !line.starts_with('\t') {
            property = line.to_lowercase().replace(' ', "_");
        }
        let Some(rest) = line.strip_prefix("\tCase [") else { continue };
        let (lits, verdict) = rest.split_once("] ").unwrap();
        let lits: BTreeSet<String> = if lits.is_empty() {
            BTreeSet::new()
        } else {
            lits.split(", ").map(String::from).collect()
        };
        found.insert((property.clone(), lits, verdict.starts_with("satisfies")));
    }
    found
}

#[test]
fn json_report_matches_text_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let (code, out, _) =
        run(&[&two_player(), "--all_cases", "--counterexamples", "--preconditions", "--json-out", a.to_str().unwrap()]);
    let (code2, _, _) =
        run(&[&two_player(), "--all_cases", "--counterexamples", "--preconditions", "--json-out", b.to_str().unwrap()]);
    assert_eq!((code, code2), (1, 1));
    let text_a = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text_a, std::fs::read_to_string(&b).unwrap());

    let report: Value = serde_json::from_str(&text_a).unwrap();
    assert_eq!(report["exit_code"], 1);
    let mut from_json = BTreeSet::new();
    for r in report["results"].as_array().unwrap() {
        let property = r["property"].as_str().unwrap().to_string();
        let verdict = r["verdict"].as_str().unwrap();
        let adjective = match property.as_str() {
            "weak_immunity" => "weak immune",
            "weaker_immunity" => "weaker immune",
            "collusion_resilience" => "collusion resilient",
            _ => "practical",
        };
        let line = if verdict == "yes" { format!("YES, it is {adjective}.") } else { format!("NO, it is not {adjective}.") };
        assert!(out.contains(&line));
        assert_eq!(r["partition_verified"], true);
        for c in r["cases"].as_array().unwrap() {
            let lits = c["literals"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()).collect();
            from_json.insert((property.clone(), lits, c["outcome"] == "satisfied"));
        }
        for ce in r["counterexamples"].as_array().into_iter().flatten() {
            let case: Vec<&str> = ce["case"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
            assert!(out.contains(&format!("Counterexample for [{}]:", case.join(", "))));
        }
        if let Some(p) = r.get("precondition") {
            assert!(out.contains(&format!("Weakest Precondition:\n\t{}\n", p["formula"].as_str().unwrap())));
            assert_eq!(p["verified"], true);
        }
    }
    assert_eq!(from_json, cases_from_text(&out));
}

#[test]
fn dump_smt_writes_queries() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("nested/smt");
    let (code, _, _) = run(&[&two_player(), "--weak_immunity", "--dump-smt", dump.to_str().unwrap()]);
    assert_eq!(code, 1);
    let files: Vec<_> = std::fs::read_dir(&dump).unwrap().collect();
    assert!(!files.is_empty());
    let first = std::fs::read_to_string(files[0].as_ref().unwrap().path()).unwrap();
    assert!(first.contains("(check-sat)"));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"players\": []}").unwrap();
    let (code, _, err) = run(&[bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.json"));
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["missing.json"]).0, 2);
    assert_eq!(run(&[&two_player(), "--solver", "cvc5"]).0, 2);
}

#[test]
fn inconsistent_assumptions_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("g.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(two_player()).unwrap()).unwrap();
    doc["initial_constraints"] = serde_json::json!(["a > 0", "a < 0"]);
    std::fs::write(&game, doc.to_string()).unwrap();
    let (code, _, err) = run(&[game.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn help_and_version_exit_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for flag in ["--preconditions", "--all_counterexamples", "--collusion_resilience", "--json-out", "--dump-smt", "--seed"] {
        assert!(out.contains(flag), "{flag}");
    }
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn bench_prints_a_table() {
    let (code, out, _) = run(&["bench", "--solver", "embedded", &two_player()]);
    assert_eq!(code, 0);
    let header = out.lines().next().unwrap();
    for col in ["name", "nodes", "players", "histories", "seconds"] {
        assert!(header.contains(col));
    }
    assert!(out.lines().any(|l| l.starts_with("generated-200")));
}
