//! Verdict relations that must hold independently of any oracle.

use checkmate_core::engine::{check_property, EngineOptions};
use checkmate_core::game::{parse_game, Property};
use checkmate_core::oracle::{random_document, GenParams};
use checkmate_core::solver::{BackendKind, SolverConfig};
use serde_json::Value;

fn reverse_children(node: &mut Value) {
    if let Some(children) = node.get_mut("children").and_then(Value::as_array_mut) {
        children.reverse();
        for c in children {
            reverse_children(&mut c["child"]);
        }
    }
}

fn verdicts(doc: &Value, cfg: &SolverConfig) -> Vec<bool> {
    let game = parse_game(&doc.to_string()).unwrap();
    let h = game.honest_histories[0].clone();
    Property::ALL
        .into_iter()
        .map(|p| check_property(&game, &h, p, cfg, EngineOptions::default()).unwrap().holds)
        .collect()
}

#[test]
fn child_order_does_not_change_verdicts() {
    let cfg = SolverConfig::with_backend(BackendKind::Embedded);
    for seed in 0..40 {
        let mut doc = random_document(&GenParams { seed, symbolic: (seed % 3) as usize, ..GenParams::default() });
        let before = verdicts(&doc, &cfg);
        reverse_children(&mut doc["tree"]);
        assert_eq!(before, verdicts(&doc, &cfg), "seed {seed}");
    }
}

#[test]
fn weak_immunity_implies_weaker_immunity() {
    let cfg = SolverConfig::with_backend(BackendKind::Embedded);
    let mut strong = 0;
    for seed in 0..80 {
        let doc = random_document(&GenParams {
            seed,
            symbolic: (seed % 3) as usize,
            infinitesimal_probability: 0.6,
            ..GenParams::default()
        });
        let v = verdicts(&doc, &cfg);
        if v[0] {
            strong += 1;
            assert!(v[1], "seed {seed}");
        }
    }
    assert!(strong > 0);
}

#[test]
fn backends_agree() {
    let z3 = SolverConfig::with_backend(BackendKind::Z3);
    if z3.open().is_err() {
        return;
    }
    let embedded = SolverConfig::with_backend(BackendKind::Embedded);
    for seed in 0..25 {
        let doc = random_document(&GenParams { seed, symbolic: 2, ..GenParams::default() });
        assert_eq!(verdicts(&doc, &embedded), verdicts(&doc, &z3), "seed {seed}");
    }
}
