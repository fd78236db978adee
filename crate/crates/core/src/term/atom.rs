//! Real-arithmetic atoms `p op 0` in canonical form.

use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::number::{denominator_lcm, fmt_smt, Rational};
use super::poly::{smt_symbol, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator obtained by swapping both sides.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn holds<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn infix(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn smt(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "distinct",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// `poly op 0`, with the first monomial's coefficient positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealAtom {
    poly: Poly,
    op: CmpOp,
}

/// Either a genuine atom or a constant truth value after folding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomOrConst {
    Atom(RealAtom),
    Const(bool),
}

impl RealAtom {
    /// Builds `lhs op rhs`, folding it when the difference is constant.
    pub fn compare(op: CmpOp, lhs: &Poly, rhs: &Poly) -> AtomOrConst {
        Self::new(lhs.sub(rhs), op)
    }

    pub fn new(poly: Poly, op: CmpOp) -> AtomOrConst {
        if let Some(c) = poly.as_constant() {
            return AtomOrConst::Const(op.holds(&c, &Rational::zero()));
        }
        let negative = poly.leading_coefficient().is_some_and(|c| c.is_negative());
        if negative {
            AtomOrConst::Atom(RealAtom { poly: poly.neg(), op: op.flip() })
        } else {
            AtomOrConst::Atom(RealAtom { poly, op })
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn op(&self) -> CmpOp {
        self.op
    }

    pub fn negate(&self) -> RealAtom {
        RealAtom { poly: self.poly.clone(), op: self.op.negate() }
    }

    pub fn vars(&self) -> Vec<String> {
        self.poly.vars().into_iter().collect()
    }

    pub fn evaluate(&self, assignment: &HashMap<String, Rational>) -> Result<bool, String> {
        let v = self.poly.evaluate(assignment)?;
        Ok(self.op.holds(&v, &Rational::zero()))
    }

    /// Prefix form used in logs and case labels, e.g. `(>= (- a 2.0) 0.0)`.
    pub fn to_smt(&self) -> String {
        if self.op == CmpOp::Ne {
            return format!("(not (= {} 0.0))", self.poly.to_smt());
        }
        format!("({} {} 0.0)", self.op.smt(), self.poly.to_smt())
    }

    /// A single-variable linear atom as a bound `(var, op, value)`.
    pub fn as_bound(&self) -> Option<(String, CmpOp, Rational)> {
        if !self.poly.is_linear() {
            return None;
        }
        let mut var = None;
        for (m, c) in self.poly.terms() {
            if !m.is_constant() {
                if var.is_some() {
                    return None;
                }
                var = Some((m.factors()[0].clone(), c.clone()));
            }
        }
        let (name, coef) = var?;
        let value = -self.poly.constant_term() / &coef;
        let op = if coef.is_negative() { self.op.flip() } else { self.op };
        Some((name, op, value))
    }

    /// Prefix form that prints single-variable atoms as bounds, e.g. `(>= a 2.0)`.
    pub fn to_smt_bound(&self) -> String {
        match self.as_bound() {
            Some((var, CmpOp::Ne, value)) => {
                format!("(not (= {} {}))", smt_symbol(&var), fmt_smt(&value))
            }
            Some((var, op, value)) => format!("({} {} {})", op.smt(), smt_symbol(&var), fmt_smt(&value)),
            None => self.to_smt(),
        }
    }

    /// The polynomial scaled to integer coefficients, keeping the operator.
    pub fn integral_poly(&self) -> Poly {
        let l = denominator_lcm(self.poly.terms().map(|(_, c)| c));
        self.poly.scale(&l)
    }
}

impl fmt::Display for RealAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_smt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::number::int;

    fn a_minus_2() -> Poly {
        Poly::var("a").add(&Poly::constant(int(-2)))
    }

    #[test]
    fn constant_atoms_fold() {
        assert_eq!(RealAtom::new(Poly::zero(), CmpOp::Ge), AtomOrConst::Const(true));
        assert_eq!(RealAtom::new(Poly::constant(int(1)), CmpOp::Le), AtomOrConst::Const(false));
    }

    #[test]
    fn canonical_sign() {
        let AtomOrConst::Atom(x) = RealAtom::compare(CmpOp::Le, &Poly::constant(int(2)), &Poly::var("a")) else {
            panic!()
        };
        assert_eq!(x.to_smt(), "(>= (- a 2.0) 0.0)");
        assert_eq!(x.negate().to_smt(), "(< (- a 2.0) 0.0)");
    }

    #[test]
    fn bounds() {
        let AtomOrConst::Atom(x) = RealAtom::new(a_minus_2(), CmpOp::Ge) else { panic!() };
        assert_eq!(x.to_smt_bound(), "(>= a 2.0)");
        let AtomOrConst::Atom(y) = RealAtom::new(Poly::var("b").scale(&int(2)), CmpOp::Lt) else {
            panic!()
        };
        assert_eq!(y.to_smt_bound(), "(< b 0.0)");
    }
}
