//! Two-component utilities: a real part and an infinitesimal part, ordered
//! lexicographically.

use std::collections::HashMap;

use super::atom::{CmpOp, RealAtom};
use super::expr::{Expr, ExprError};
use super::number::Rational;
use super::poly::Poly;
use super::symbols::SymbolTable;
use crate::formula::Formula;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UtilityPair {
    pub real: Poly,
    pub inf: Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl UtilityPair {
    pub fn zero() -> Self {
        UtilityPair { real: Poly::zero(), inf: Poly::zero() }
    }

    pub fn real(p: Poly) -> Self {
        UtilityPair { real: p, inf: Poly::zero() }
    }

    pub fn new(real: Poly, inf: Poly) -> Self {
        UtilityPair { real, inf }
    }

    /// Whether the pair respects the degree discipline for `symbols`:
    /// no infinitesimal in the real part, exactly one per infinitesimal monomial.
    pub fn is_well_formed(&self, symbols: &SymbolTable) -> bool {
        let count = |m: &super::poly::Monomial| m.factors().iter().filter(|f| symbols.is_infinitesimal(f)).count();
        self.real.terms().all(|(m, _)| count(m) == 0) && self.inf.terms().all(|(m, _)| count(m) == 1)
    }

    pub fn evaluate(&self, assignment: &HashMap<String, Rational>) -> Result<(Rational, Rational), String> {
        Ok((self.real.evaluate(assignment)?, self.inf.evaluate(assignment)?))
    }
}

/// Arithmetic closed over utility pairs.
pub fn utility_arith(op: ArithOp, u: &UtilityPair, v: &UtilityPair) -> Result<UtilityPair, ExprError> {
    Ok(match op {
        ArithOp::Add => UtilityPair::new(u.real.add(&v.real), u.inf.add(&v.inf)),
        ArithOp::Sub => UtilityPair::new(u.real.sub(&v.real), u.inf.sub(&v.inf)),
        ArithOp::Mul => {
            if !u.inf.is_zero() && !v.inf.is_zero() {
                return Err(ExprError::InfinitesimalProduct);
            }
            UtilityPair::new(u.real.mul(&v.real), u.real.mul(&v.inf).add(&v.real.mul(&u.inf)))
        }
    })
}

/// Splits an arithmetic expression into its real and infinitesimal parts.
pub fn to_utility(e: &Expr, symbols: &SymbolTable) -> Result<UtilityPair, ExprError> {
    let u = match e {
        Expr::Lit(r) => UtilityPair::real(Poly::constant(r.clone())),
        Expr::Sym(s) => {
            if symbols.is_infinitesimal(s) {
                UtilityPair::new(Poly::zero(), Poly::var(s))
            } else {
                UtilityPair::real(Poly::var(s))
            }
        }
        Expr::Neg(x) => {
            let u = to_utility(x, symbols)?;
            UtilityPair::new(u.real.neg(), u.inf.neg())
        }
        Expr::Add(a, b) => utility_arith(ArithOp::Add, &to_utility(a, symbols)?, &to_utility(b, symbols)?)?,
        Expr::Sub(a, b) => utility_arith(ArithOp::Sub, &to_utility(a, symbols)?, &to_utility(b, symbols)?)?,
        Expr::Mul(a, b) => utility_arith(ArithOp::Mul, &to_utility(a, symbols)?, &to_utility(b, symbols)?)?,
        Expr::Cmp(..) | Expr::Or(..) => return Err(ExprError::NotArithmetic),
    };
    debug_assert!(u.is_well_formed(symbols));
    Ok(u)
}

/// Lexicographic comparison of two utilities as a formula over real atoms.
pub fn compare(op: CmpOp, u: &UtilityPair, v: &UtilityPair) -> Formula {
    let dr = u.real.sub(&v.real);
    let di = u.inf.sub(&v.inf);
    let real = |op| Formula::from(RealAtom::new(dr.clone(), op));
    let inf = |op| Formula::from(RealAtom::new(di.clone(), op));
    if di.is_zero() {
        return real(op);
    }
    if dr.is_zero() {
        return inf(op);
    }
    match op {
        CmpOp::Eq => Formula::and([real(CmpOp::Eq), inf(CmpOp::Eq)]),
        CmpOp::Ne => Formula::or([real(CmpOp::Ne), inf(CmpOp::Ne)]),
        CmpOp::Gt | CmpOp::Ge | CmpOp::Lt | CmpOp::Le => {
            let strict = match op {
                CmpOp::Gt | CmpOp::Ge => CmpOp::Gt,
                _ => CmpOp::Lt,
            };
            Formula::or([real(strict), Formula::and([real(CmpOp::Eq), inf(op)])])
        }
    }
}

/// Lexicographic comparison of evaluated pairs.
pub fn compare_values(op: CmpOp, u: &(Rational, Rational), v: &(Rational, Rational)) -> bool {
    op.holds(u, v)
}

/// Translates a parsed constraint into a formula, comparing both sides as utilities.
pub fn constraint_to_formula(e: &Expr, symbols: &SymbolTable) -> Result<Formula, ExprError> {
    match e {
        Expr::Cmp(op, a, b) => Ok(compare(*op, &to_utility(a, symbols)?, &to_utility(b, symbols)?)),
        Expr::Or(a, b) => Ok(Formula::or([
            constraint_to_formula(a, symbols)?,
            constraint_to_formula(b, symbols)?,
        ])),
        _ => Err(ExprError::NotBoolean),
    }
}
