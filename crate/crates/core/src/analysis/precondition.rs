//! Weakest preconditions: the negated disjunction of violating cases,
//! simplified into a short conjunction of clauses.

use std::fmt;

use super::AnalysisError;
use crate::engine::{Case, CaseContext};
use crate::formula::Formula;
use crate::solver::{entails_formula, Entailment};
use crate::term::{CmpOp, Expr, Poly, Rational, RealAtom};

/// A conjunction of clauses; no clauses is `true`, an empty clause `false`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Precondition {
    pub clauses: Vec<Vec<RealAtom>>,
}

fn render_clause(c: &[RealAtom]) -> String {
    match c {
        [] => "false".into(),
        [l] => l.to_smt_bound(),
        _ => format!("(or {})", c.iter().map(|l| l.to_smt_bound()).collect::<Vec<_>>().join(" ")),
    }
}

fn poly_expr(p: &Poly) -> Expr {
    let mut out: Option<Expr> = None;
    for (m, c) in p.terms() {
        let mut t = if m.is_constant() { Some(Expr::Lit(c.clone())) } else { None };
        let one = Rational::from_integer(1.into());
        if !m.is_constant() && *c != one {
            t = Some(Expr::Lit(c.clone()));
        }
        for f in m.factors() {
            t = Some(match t {
                None => Expr::sym(f),
                Some(e) => Expr::Mul(Box::new(e), Box::new(Expr::sym(f))),
            });
        }
        let t = t.unwrap();
        out = Some(match out {
            None => t,
            Some(e) => Expr::Add(Box::new(e), Box::new(t)),
        });
    }
    out.unwrap_or_else(|| Expr::Lit(Rational::from_integer(0.into())))
}

fn atom_expr(a: &RealAtom) -> Expr {
    match a.as_bound() {
        Some((var, op, value)) => Expr::Cmp(op, Box::new(Expr::sym(&var)), Box::new(Expr::Lit(value))),
        None => Expr::Cmp(a.op(), Box::new(poly_expr(a.poly())), Box::new(Expr::Lit(Rational::from_integer(0.into())))),
    }
}

impl Precondition {
    pub fn is_true(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn formula(&self) -> Formula {
        Formula::and(self.clauses.iter().map(|c| Formula::or(c.iter().cloned().map(Formula::Atom))))
    }

    pub fn to_smt(&self) -> String {
        match self.clauses.as_slice() {
            [] => "true".into(),
            [c] => render_clause(c),
            cs => format!("(and {})", cs.iter().map(|c| render_clause(c)).collect::<Vec<_>>().join(" ")),
        }
    }

    /// The clauses as input-language constraints, one per clause.
    pub fn to_constraints(&self) -> Vec<Expr> {
        self.clauses
            .iter()
            .map(|c| match c.as_slice() {
                [] => Expr::Cmp(CmpOp::Lt, Box::new(Expr::Lit(crate::term::int(1))), Box::new(Expr::Lit(crate::term::int(0)))),
                [first, rest @ ..] => rest
                    .iter()
                    .fold(atom_expr(first), |acc, l| Expr::Or(Box::new(acc), Box::new(atom_expr(l)))),
            })
            .collect()
    }
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_smt())
    }
}

fn subsumes(a: &[RealAtom], b: &[RealAtom]) -> bool {
    a.iter().all(|l| b.contains(l))
}

fn normalize(clauses: &mut Vec<Vec<RealAtom>>) {
    for c in clauses.iter_mut() {
        c.sort_by_key(|l| l.to_smt_bound());
        c.dedup();
    }
    clauses.sort_by_key(|c| render_clause(c));
    clauses.dedup();
}

/// Unit propagation and subsumption until nothing changes.
fn propagate(clauses: &mut Vec<Vec<RealAtom>>) -> bool {
    let mut changed = false;
    let units: Vec<RealAtom> = clauses.iter().filter(|c| c.len() == 1).map(|c| c[0].clone()).collect();
    for c in clauses.iter_mut() {
        if c.len() > 1 {
            let before = c.len();
            c.retain(|l| !units.contains(&l.negate()));
            changed |= c.len() != before;
        }
    }
    let snapshot = clauses.clone();
    let before = clauses.len();
    let mut kept: Vec<Vec<RealAtom>> = Vec::new();
    for (i, c) in snapshot.iter().enumerate() {
        let dominated = snapshot
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && subsumes(d, c) && (d.len() < c.len() || j < i));
        if !dominated {
            kept.push(c.clone());
        }
    }
    *clauses = kept;
    changed || clauses.len() != before
}

/// Replaces `(C or l)` and `(C or not l)` by `C`.
fn merge_complementary(clauses: &mut Vec<Vec<RealAtom>>) -> bool {
    for i in 0..clauses.len() {
        for j in i + 1..clauses.len() {
            let (a, b) = (&clauses[i], &clauses[j]);
            if a.len() != b.len() {
                continue;
            }
            let diff: Vec<&RealAtom> = a.iter().filter(|l| !b.contains(l)).collect();
            if diff.len() == 1 && b.contains(&diff[0].negate()) {
                let pivot = diff[0].clone();
                let merged: Vec<RealAtom> = a.iter().filter(|l| **l != pivot).cloned().collect();
                clauses.remove(j);
                clauses[i] = merged;
                return true;
            }
        }
    }
    false
}

/// Keeps only the tightest unit bound per variable and direction.
fn collapse_bounds(clauses: &mut Vec<Vec<RealAtom>>) {
    let bound = |c: &Vec<RealAtom>| if c.len() == 1 { c[0].as_bound() } else { None };
    let tighter = |op: CmpOp, v: &Rational, op2: CmpOp, v2: &Rational| -> bool {
        match op {
            CmpOp::Ge | CmpOp::Gt => v > v2 || (v == v2 && op == CmpOp::Gt && op2 == CmpOp::Ge),
            CmpOp::Le | CmpOp::Lt => v < v2 || (v == v2 && op == CmpOp::Lt && op2 == CmpOp::Le),
            _ => false,
        }
    };
    let direction = |op: CmpOp| match op {
        CmpOp::Ge | CmpOp::Gt => Some(true),
        CmpOp::Le | CmpOp::Lt => Some(false),
        _ => None,
    };
    let snapshot = clauses.clone();
    clauses.retain(|c| {
        let Some((var, op, v)) = bound(c) else { return true };
        let Some(dir) = direction(op) else { return true };
        !snapshot.iter().any(|d| match bound(d) {
            Some((var2, op2, v2)) => var2 == var && direction(op2) == Some(dir) && tighter(op2, &v2, op, &v),
            None => false,
        })
    });
}

/// Simplifies the negation of `unsat` under the context's assumptions.
pub fn weakest_precondition(ctx: &mut CaseContext, unsat: &[Case]) -> Result<Precondition, AnalysisError> {
    ctx.enter(&Case::default())?;
    let mut clauses = Vec::new();
    for case in unsat {
        let clause: Vec<RealAtom> = case.0.iter().map(|l| l.negate()).collect();
        let f = Formula::or(clause.iter().cloned().map(Formula::Atom));
        if entails_formula(ctx.solver(), &f)? == Entailment::Entailed {
            continue;
        }
        let mut kept = Vec::new();
        for l in clause {
            if ctx.entail(&l)? != Entailment::Contradicted {
                kept.push(l);
            }
        }
        if kept.is_empty() {
            return Ok(Precondition { clauses: vec![Vec::new()] });
        }
        clauses.push(kept);
    }
    normalize(&mut clauses);
    loop {
        let mut changed = propagate(&mut clauses);
        changed |= merge_complementary(&mut clauses);
        normalize(&mut clauses);
        if clauses.iter().any(|c| c.is_empty()) {
            return Ok(Precondition { clauses: vec![Vec::new()] });
        }
        if !changed {
            break;
        }
    }
    collapse_bounds(&mut clauses);
    Ok(Precondition { clauses })
}

/// Checks equivalence with the negated case disjunction under the assumptions.
pub fn verify_precondition(ctx: &mut CaseContext, pre: &Precondition, unsat: &[Case]) -> Result<bool, AnalysisError> {
    ctx.enter(&Case::default())?;
    let violated = Formula::or(unsat.iter().map(|c| c.formula()));
    let wp = pre.formula();
    let too_strong = ctx.sat_with(&Formula::and([wp.clone().not(), violated.clone().not()]))?;
    let too_weak = ctx.sat_with(&Formula::and([wp, violated]))?;
    Ok(!too_strong && !too_weak)
}
