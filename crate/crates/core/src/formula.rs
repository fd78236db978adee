//! Boolean formulas over real atoms and named Boolean variables.
//!
//! Formulas are kept in negation normal form: negation is pushed into atoms
//! (by negating the comparison) and only ever wraps a variable.

use std::collections::{BTreeSet, HashMap};

use crate::term::{AtomOrConst, Rational, RealAtom};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Atom(RealAtom),
    Var(String),
    NotVar(String),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

/// Three-valued truth used when atoms may be undetermined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl From<AtomOrConst> for Formula {
    fn from(a: AtomOrConst) -> Self {
        match a {
            AtomOrConst::Atom(a) => Formula::Atom(a),
            AtomOrConst::Const(b) => Formula::Const(b),
        }
    }
}

impl From<RealAtom> for Formula {
    fn from(a: RealAtom) -> Self {
        Formula::Atom(a)
    }
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::Const(true)
    }

    pub fn ff() -> Formula {
        Formula::Const(false)
    }

    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Const(true) => {}
                Formula::Const(false) => return Formula::ff(),
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::tt(),
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Const(false) => {}
                Formula::Const(true) => return Formula::tt(),
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::ff(),
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(premise: Formula, conclusion: Formula) -> Formula {
        Formula::or([premise.not(), conclusion])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        match self {
            Formula::Const(b) => Formula::Const(!b),
            Formula::Atom(a) => Formula::Atom(a.negate()),
            Formula::Var(v) => Formula::NotVar(v),
            Formula::NotVar(v) => Formula::Var(v),
            Formula::And(ps) => Formula::or(ps.into_iter().map(Formula::not)),
            Formula::Or(ps) => Formula::and(ps.into_iter().map(Formula::not)),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Const(true))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::Const(false))
    }

    /// Atoms in left-to-right order, with repetitions.
    pub fn atoms(&self) -> Vec<&RealAtom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a RealAtom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
            _ => {}
        }
    }

    pub fn real_symbols(&self) -> BTreeSet<String> {
        self.atoms().into_iter().flat_map(|a| a.vars()).collect()
    }

    pub fn bool_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(v) | Formula::NotVar(v) => {
                out.insert(v.clone());
            }
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            _ => {}
        }
    }

    /// Replaces every atom by a constant chosen by `value`.
    pub fn fold_atoms(&self, value: &mut impl FnMut(&RealAtom) -> bool) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Const(value(a)),
            Formula::And(ps) => Formula::and(ps.iter().map(|p| p.fold_atoms(value))),
            Formula::Or(ps) => Formula::or(ps.iter().map(|p| p.fold_atoms(value))),
            other => other.clone(),
        }
    }

    /// Kleene evaluation with atom and variable truth supplied by the caller.
    pub fn truth<E>(
        &self,
        atom: &mut impl FnMut(&RealAtom) -> Result<Truth, E>,
        var: &impl Fn(&str) -> Truth,
    ) -> Result<Truth, E> {
        Ok(match self {
            Formula::Const(b) => Truth::from(*b),
            Formula::Atom(a) => atom(a)?,
            Formula::Var(v) => var(v),
            Formula::NotVar(v) => match var(v) {
                Truth::True => Truth::False,
                Truth::False => Truth::True,
                Truth::Unknown => Truth::Unknown,
            },
            Formula::And(ps) => {
                let mut acc = Truth::True;
                for p in ps {
                    match p.truth(atom, var)? {
                        Truth::False => return Ok(Truth::False),
                        Truth::Unknown => acc = Truth::Unknown,
                        Truth::True => {}
                    }
                }
                acc
            }
            Formula::Or(ps) => {
                let mut acc = Truth::False;
                for p in ps {
                    match p.truth(atom, var)? {
                        Truth::True => return Ok(Truth::True),
                        Truth::Unknown => acc = Truth::Unknown,
                        Truth::False => {}
                    }
                }
                acc
            }
        })
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate(
        &self,
        reals: &HashMap<String, Rational>,
        bools: &HashMap<String, bool>,
    ) -> Result<bool, String> {
        let t = self.truth(
            &mut |a: &RealAtom| a.evaluate(reals).map(Truth::from),
            &|v: &str| bools.get(v).map(|b| Truth::from(*b)).unwrap_or(Truth::Unknown),
        )?;
        match t {
            Truth::True => Ok(true),
            Truth::False => Ok(false),
            Truth::Unknown => Err("unassigned Boolean variable".to_string()),
        }
    }

    /// SMT-LIB rendering; `sym` maps Boolean variable names to solver symbols.
    pub fn to_smt_with(&self, sym: &dyn Fn(&str) -> String) -> String {
        match self {
            Formula::Const(true) => "true".into(),
            Formula::Const(false) => "false".into(),
            Formula::Atom(a) => a.to_smt(),
            Formula::Var(v) => sym(v),
            Formula::NotVar(v) => format!("(not {})", sym(v)),
            Formula::And(ps) => format!(
                "(and {})",
                ps.iter().map(|p| p.to_smt_with(sym)).collect::<Vec<_>>().join(" ")
            ),
            Formula::Or(ps) => format!(
                "(or {})",
                ps.iter().map(|p| p.to_smt_with(sym)).collect::<Vec<_>>().join(" ")
            ),
        }
    }

    pub fn to_smt(&self) -> String {
        self.to_smt_with(&|v| v.to_string())
    }
}
