//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use checkmate_cli::bench;
use checkmate_core::analysis::weakest_precondition;
use checkmate_core::engine::{Analyzer, Case, EngineOptions};
use checkmate_core::formula::Formula;
use checkmate_core::game::{parse_game, Game, History, Property};
use checkmate_core::oracle::{
    check_game, closure_run, deviation_is_profitable, differential_run, oracle_check, profit_attacks, sampling_run,
    ClosureStats, ConcreteGame, GenParams, DEFAULT_GUARD,
};
use checkmate_core::solver::{is_sat, SolverConfig};
use checkmate_core::term::{constraint_to_formula, parse_constraint, ratio};
use serde_json::Value;

type Outcome = Result<String, String>;

fn two_player_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/games/two_player.json")
}

fn two_player() -> Game {
    parse_game(&std::fs::read_to_string(two_player_path()).unwrap()).unwrap()
}

fn checkmate(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_checkmate")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn constraint(game: &Game, text: &str) -> Formula {
    constraint_to_formula(&parse_constraint(text, &game.symbols).unwrap(), &game.symbols).unwrap()
}

fn literal_sets(result: &Value) -> Vec<(BTreeSet<String>, String)> {
    result["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let lits = c["literals"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()).collect();
            (lits, c["outcome"].as_str().unwrap().to_string())
        })
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let start = Instant::now();
    let (code, out, err) = checkmate(&[
        two_player_path().to_str().unwrap(),
        "--weak_immunity",
        "--counterexamples",
        "--preconditions",
        "--json-out",
        json.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    ensure(code == 1, format!("exit {code}: {err}"))?;
    ensure(out.contains("NO, it is not weak immune."), "verdict line missing")?;
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let r = &report["results"][0];
    let cases = literal_sets(r);
    let expected = vec![
        (set(&["(>= b 0.0)", "(>= (- a 2.0) 0.0)"]), "satisfied".to_string()),
        (set(&["(>= b 0.0)", "(< (- a 2.0) 0.0)"]), "violated".to_string()),
        (set(&["(< b 0.0)"]), "violated".to_string()),
    ];
    ensure(cases == expected, format!("cases {cases:?}"))?;
    ensure(out.contains("\tCase [(>= b 0.0), (>= (- a 2.0) 0.0)] satisfies property."), "first case line")?;
    ensure(out.contains("\tCase [(>= b 0.0), (< (- a 2.0) 0.0)] violates property."), "second case line")?;
    ensure(
        out.contains(
            "Counterexample for [(>= b 0.0), (< (- a 2.0) 0.0)]:\n\tPlayer A can be harmed if:\n\tPlayer B takes action l_B after history [r_A]\n",
        ),
        "counterexample block",
    )?;

    let game = two_player();
    let h = game.honest_histories[0].clone();
    let cfg = SolverConfig::default();
    let mut an = Analyzer::new(&game, &h, Property::WeakImmunity, &cfg).map_err(|e| e.to_string())?;
    let result = an.run(EngineOptions { explore_all: true }).map_err(|e| e.to_string())?;
    let violated: Vec<Case> = result.violated_cases().into_iter().map(|(c, _)| c.clone()).collect();
    let wp = weakest_precondition(&mut an.ctx, &violated).map_err(|e| e.to_string())?;
    ensure(r["precondition"]["formula"] == wp.to_smt(), "CLI and library preconditions differ")?;
    ensure(r["precondition"]["verified"] == true, "precondition not verified")?;
    let target = Formula::and([constraint(&game, "a >= 2"), constraint(&game, "b >= 0")]);
    for f in [
        Formula::and([wp.formula(), target.clone().not()]),
        Formula::and([wp.formula().not(), target.clone()]),
    ] {
        let mut s = cfg.open().map_err(|e| e.to_string())?;
        s.assert(&game.assumptions(Property::WeakImmunity)).unwrap();
        s.assert(&f).unwrap();
        ensure(!is_sat(s.as_mut()).map_err(|e| e.to_string())?, "precondition not equivalent to a >= 2 and b >= 0")?;
    }
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("reference cases, counterexample and precondition in {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let (code, out, err) = checkmate(&[two_player_path().to_str().unwrap(), "--collusion_resilience", "--practicality", "--counterexamples"]);
    ensure(code == 1, format!("exit {code}: {err}"))?;
    ensure(out.contains("NO, it is not collusion resilient."), "collusion verdict")?;
    ensure(out.contains("Group [A] can profit if:\n\tPlayer A takes action l_A after history []"), "collusion counterexample")?;
    ensure(out.contains("NO, it is not practical."), "practicality verdict")?;
    ensure(
        out.contains("Player A can profit by deviating from the honest history after [] to the rational subhistory [l_A]"),
        "practicality counterexample",
    )?;
    let game = two_player();
    let h = game.honest_histories[0].clone();
    let mut points = 0;
    for a in [ratio(1, 2), ratio(1, 1), ratio(2, 1), ratio(3, 1), ratio(10, 1)] {
        for b in [ratio(-1, 1), ratio(0, 1), ratio(1, 1), ratio(3, 1)] {
            let env = HashMap::from([("a".to_string(), a.clone()), ("b".to_string(), b)]);
            let cg = ConcreteGame::new(&game, env).map_err(|e| e.to_string())?;
            for p in [Property::CollusionResilience, Property::Practicality] {
                ensure(!oracle_check(&cg, &h, p, DEFAULT_GUARD).unwrap(), format!("oracle says {p:?} holds at a={a}"))?;
            }
            let attacks = profit_attacks(&cg, &h, &[0], DEFAULT_GUARD).unwrap();
            ensure(attacks.iter().any(|s| s.len() == 1 && s.get(&0) == Some(&0)), "oracle lacks the l_A attack")?;
            ensure(
                deviation_is_profitable(&cg, &h, &History::default(), &History::new(["l_A"]), DEFAULT_GUARD).unwrap(),
                "oracle rejects the deviation",
            )?;
            points += 1;
        }
    }
    Ok(format!("both NO, confirmed by the oracle at {points} assignments"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let r = differential_run(&GenParams::default(), 500, &SolverConfig::default(), DEFAULT_GUARD).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.games >= 500, format!("only {} games", r.games))?;
    if let Some(m) = r.mismatches.first() {
        return Err(format!("{} mismatches, first seed {} ({:?})", r.mismatches.len(), m.seed, m.property));
    }
    ensure(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"))?;
    Ok(format!("{} games, {} checks, 0 mismatches in {:.1}s", r.games, r.checks, elapsed.as_secs_f64()))
}

struct Suites {
    closure: ClosureStats,
    sampling: Result<checkmate_core::oracle::SampleReport, String>,
}

fn criterion_4(suites: &Suites) -> Outcome {
    let r = suites.sampling.as_ref().map_err(|e| e.clone())?;
    ensure(r.games >= 100, format!("only {} games", r.games))?;
    ensure(r.violations.is_empty(), format!("{} oracle disagreements: {:?}", r.violations.len(), r.violations.first()))?;
    ensure(r.unwitnessed == 0, format!("{} NO verdicts without a failing sample", r.unwitnessed))?;
    Ok(format!("{} games, {} YES, {} NO, {} oracle samples", r.games, r.yes, r.no, r.points))
}

fn criterion_5(suites: &Suites) -> Outcome {
    let c = &suites.closure;
    ensure(c.unverified_preconditions == 0, format!("{} unverified preconditions", c.unverified_preconditions))?;
    ensure(c.closure_failures == 0, format!("{} preconditions do not restore the property", c.closure_failures))?;
    Ok(format!(
        "{} violations, all preconditions verified and restoring ({} unsatisfiable)",
        c.violations, c.vacuous_closures
    ))
}

fn criterion_6(suites: &Suites) -> Outcome {
    let c = &suites.closure;
    ensure(c.partition_failures == 0, format!("{} partition failures", c.partition_failures))?;
    Ok(format!("{} runs, leaf cases exhaustive and disjoint", c.instances))
}

fn merge(into: &mut ClosureStats, from: &ClosureStats) {
    into.instances += from.instances;
    into.violations += from.violations;
    into.partition_failures += from.partition_failures;
    into.unverified_preconditions += from.unverified_preconditions;
    into.closure_failures += from.closure_failures;
    into.vacuous_closures += from.vacuous_closures;
}

fn run_suites() -> Result<Suites, String> {
    let cfg = SolverConfig::default();
    let mut closure = ClosureStats::default();
    check_game(&two_player(), &cfg, &mut closure).map_err(|e| e.to_string())?;
    merge(&mut closure, &closure_run(&GenParams::default(), 500, &cfg).map_err(|e| e.to_string())?);
    let mut sampling = Err(String::new());
    let mut reports = Vec::new();
    for (symbolic, seed) in [(1, 10_000), (2, 20_000)] {
        let p = GenParams { symbolic, seed, ..GenParams::default() };
        match sampling_run(&p, 60, 12, &cfg, DEFAULT_GUARD) {
            Ok(r) => reports.push(r),
            Err(e) => sampling = Err(e.to_string()),
        }
    }
    if reports.len() == 2 {
        let mut total = reports.remove(0);
        let second = reports.remove(0);
        total.games += second.games;
        total.yes += second.yes;
        total.no += second.no;
        total.points += second.points;
        total.unwitnessed += second.unwitnessed;
        total.violations.extend(second.violations);
        merge(&mut total.closure, &second.closure);
        merge(&mut closure, &total.closure);
        sampling = Ok(total);
    }
    Ok(Suites { closure, sampling })
}

fn criterion_7() -> Outcome {
    let cfg = SolverConfig::default();
    let medium = bench::generated(200, Property::ALL.to_vec());
    let row = bench::time_game(&medium, &cfg).map_err(|e| e.to_string())?;
    ensure(row.nodes >= 200, "medium game too small")?;
    ensure(row.seconds < 60.0, format!("{} nodes took {:.1}s", row.nodes, row.seconds))?;
    let large = bench::generated(20_000, vec![Property::WeakImmunity]);
    let big = bench::time_game(&large, &cfg).map_err(|e| e.to_string())?;
    ensure(big.nodes >= 20_000, "large game too small")?;
    ensure(big.seconds < 600.0, format!("{} nodes took {:.1}s", big.nodes, big.seconds))?;
    Ok(format!(
        "{} nodes, all properties in {:.2}s; {} nodes, weak immunity in {:.2}s",
        row.nodes, row.seconds, big.nodes, big.seconds
    ))
}

fn criterion_8() -> Outcome {
    let example = two_player_path();
    let example = example.to_str().unwrap();
    let (code, out, _) = checkmate(&[example, "--weak_immunity", "--counterexamples", "--preconditions"]);
    ensure(code == 1, format!("example invocation exit {code}"))?;
    for section in [
        "WEAK IMMUNITY\n",
        "Is history [r_A, l_B] weak immune?\n",
        "\tRequire case split on (>= b 0.0)\n",
        "\tRequire case split on (>= (- a 2.0) 0.0)\n",
        "NO, it is not weak immune.\n",
        "Counterexample for [(>= b 0.0), (< (- a 2.0) 0.0)]:\n",
        "Weakest Precondition:\n\t(and (>= a 2.0) (>= b 0.0))\n",
    ] {
        ensure(out.contains(section), format!("missing section {section:?}"))?;
    }
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("smt");
    let json = dir.path().join("all.json");
    let (code, out, err) = checkmate(&[
        example,
        "--preconditions",
        "--counterexamples",
        "--all_counterexamples",
        "--all_cases",
        "--strategies",
        "--weak_immunity",
        "--weaker_immunity",
        "--collusion_resilience",
        "--practicality",
        "--json-out",
        json.to_str().unwrap(),
        "--dump-smt",
        dump.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    ensure(code == 1, format!("all flags: exit {code}: {err}"))?;
    ensure(json.exists() && std::fs::read_dir(&dump).map(|d| d.count() > 0).unwrap_or(false), "json or dump missing")?;
    let headers: Vec<usize> = ["WEAK IMMUNITY\n", "WEAKER IMMUNITY\n", "COLLUSION RESILIENCE\n", "PRACTICALITY\n"]
        .iter()
        .map(|h| out.find(h).unwrap_or(usize::MAX))
        .collect();
    ensure(headers.windows(2).all(|w| w[0] < w[1]) && headers[3] != usize::MAX, "header order")?;

    let leaf = dir.path().join("leaf.json");
    std::fs::write(
        &leaf,
        r#"{"players": ["A"], "actions": [], "infinitesimals": [], "constants": [], "initial_constraints": [],
            "property_constraints": {"weak_immunity": [], "weaker_immunity": [], "collusion_resilience": [], "practicality": []},
            "honest_histories": [[]], "tree": {"utility": [{"player": "A", "value": "1"}]}}"#,
    )
    .unwrap();
    let (code, out, _) = checkmate(&[leaf.to_str().unwrap(), "--practicality"]);
    ensure(code == 0 && out.contains("YES, it is practical."), format!("single leaf: exit {code}"))?;
    let (code, _, err) = checkmate(&[dir.path().join("missing.json").to_str().unwrap()]);
    ensure(code == 2 && err.contains("missing.json"), format!("missing file: exit {code}"))?;
    let (code, _, _) = checkmate(&[example, "--no_such_flag"]);
    ensure(code == 2, format!("bad flag: exit {code}"))?;
    let out = Command::new(env!("CARGO_BIN_EXE_checkmate"))
        .args([example, "--solver", "z3", "--weak_immunity"])
        .env("CHECKMATE_Z3", dir.path().join("no-such-solver"))
        .output()
        .unwrap();
    ensure(out.status.code() == Some(3), format!("broken backend: exit {:?}", out.status.code()))?;
    Ok("flags, report sections and exit statuses 0/1/2/3".into())
}

fn report(n: usize, outcome: Outcome, failures: &mut usize) {
    match outcome {
        Ok(detail) => println!("criterion {n}: PASS ({detail})"),
        Err(why) => {
            *failures += 1;
            println!("criterion {n}: FAIL ({why})");
        }
    }
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))
}

fn main() {
    std::panic::set_hook(Box::new(|info| eprintln!("{info}")));
    let start = Instant::now();
    let mut failures = 0;
    report(1, guarded(criterion_1), &mut failures);
    report(2, guarded(criterion_2), &mut failures);
    report(3, guarded(criterion_3), &mut failures);
    let suites = std::panic::catch_unwind(run_suites).unwrap_or_else(|_| Err("panicked".into()));
    match &suites {
        Ok(s) => {
            report(4, guarded(|| criterion_4(s)), &mut failures);
            report(5, guarded(|| criterion_5(s)), &mut failures);
            report(6, guarded(|| criterion_6(s)), &mut failures);
        }
        Err(why) => {
            for n in 4..=6 {
                report(n, Err(why.clone()), &mut failures);
            }
        }
    }
    report(7, guarded(criterion_7), &mut failures);
    report(8, guarded(criterion_8), &mut failures);
    println!("acceptance: {} of 8 criteria passed in {:.1}s", 8 - failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
