//! Property tests for the expression language and utility pairs.

use std::collections::HashMap;

use checkmate_core::game::{parse_game, Game};
use checkmate_core::oracle::eval;
use checkmate_core::term::{compare, parse_term, ratio, to_utility, CmpOp, Expr, Rational};
use proptest::prelude::*;

fn game() -> Game {
    parse_game(
        r#"{"players": ["A"], "actions": [], "infinitesimals": ["eps"], "constants": ["a", "b"],
            "initial_constraints": [],
            "property_constraints": {"weak_immunity": [], "weaker_immunity": [], "collusion_resilience": [], "practicality": []},
            "honest_histories": [[]], "tree": {"utility": [{"player": "A", "value": "0"}]}}"#,
    )
    .unwrap()
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..40).prop_map(|k| Expr::Lit(ratio(k, 4))),
        prop_oneof![Just("a"), Just("b"), Just("eps")].prop_map(Expr::sym),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Add(Box::new(x), Box::new(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Sub(Box::new(x), Box::new(y))),
            (inner.clone(), inner).prop_map(|(x, y)| Expr::Mul(Box::new(x), Box::new(y))),
        ]
    })
}

fn point() -> impl Strategy<Value = HashMap<String, Rational>> {
    (-12i64..=12, -12i64..=12).prop_map(|(a, b)| HashMap::from([("a".into(), ratio(a, 4)), ("b".into(), ratio(b, 4))]))
}

fn op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Gt), Just(CmpOp::Ge), Just(CmpOp::Eq), Just(CmpOp::Ne)]
}

/// Plain evaluation with every infinitesimal set to zero.
fn eval_at_zero(e: &Expr, env: &HashMap<String, Rational>) -> Rational {
    match e {
        Expr::Lit(r) => r.clone(),
        Expr::Sym(s) => env.get(s).cloned().unwrap_or_else(|| ratio(0, 1)),
        Expr::Neg(x) => -eval_at_zero(x, env),
        Expr::Add(x, y) => eval_at_zero(x, env) + eval_at_zero(y, env),
        Expr::Sub(x, y) => eval_at_zero(x, env) - eval_at_zero(y, env),
        Expr::Mul(x, y) => eval_at_zero(x, env) * eval_at_zero(y, env),
        _ => unreachable!(),
    }
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in expr()) {
        let g = game();
        prop_assert_eq!(parse_term(&e.to_string(), &g.symbols).unwrap(), e);
    }

    #[test]
    fn compare_agrees_with_lexicographic_values(u in expr(), v in expr(), op in op(), env in point(), eps in 1i64..1000) {
        let g = game();
        let (Ok(pu), Ok(pv)) = (to_utility(&u, &g.symbols), to_utility(&v, &g.symbols)) else { return Ok(()) };
        let (Ok(x), Ok(y)) = (eval(&u, &g, &env), eval(&v, &g, &env)) else { return Ok(()) };
        let f = compare(op, &pu, &pv);
        let mut reals = env.clone();
        reals.insert("eps".into(), ratio(eps, 1000));
        let truth = f.evaluate(&reals, &HashMap::new()).unwrap();
        prop_assert_eq!(truth, op.holds(&x, &y));
    }

    #[test]
    fn real_part_is_truncation(e in expr(), env in point()) {
        let g = game();
        let Ok(u) = to_utility(&e, &g.symbols) else { return Ok(()) };
        prop_assert_eq!(u.real.evaluate(&env).unwrap(), eval_at_zero(&e, &env));
        prop_assert!(u.is_well_formed(&g.symbols));
    }
}
