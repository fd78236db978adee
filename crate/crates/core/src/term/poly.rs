//! Canonical polynomials with rational coefficients.
//!
//! A polynomial is a sum of monomials, each a sorted multiset of symbol
//! names. Zero coefficients are never stored, so two polynomials are equal
//! exactly when their maps are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::number::{fmt_infix, fmt_smt, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<String>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: &str) -> Self {
        Monomial(vec![name.to_string()])
    }

    pub fn from_factors(mut factors: Vec<String>) -> Self {
        factors.sort();
        Monomial(factors)
    }

    pub fn factors(&self) -> &[String] {
        &self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut f = self.0.clone();
        f.extend(other.0.iter().cloned());
        Monomial::from_factors(f)
    }

    fn to_smt(&self) -> String {
        match self.0.len() {
            0 => "1.0".to_string(),
            1 => smt_symbol(&self.0[0]),
            _ => format!(
                "(* {})",
                self.0.iter().map(|s| smt_symbol(s)).collect::<Vec<_>>().join(" ")
            ),
        }
    }
}

// Variables sort before the constant monomial so that `a - 2` renders in
// that order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.is_constant()
            .cmp(&other.is_constant())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const SMT_RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "ite", "let", "true", "false", "distinct", "par", "forall",
    "exists", "match", "as", "assert", "check", "_", "BINARY", "DECIMAL", "HEXADECIMAL",
    "NUMERAL", "STRING", "Real", "Int", "Bool", "abs", "div", "mod", "to_real", "to_int",
    "is_int", "root", "root_obj", "pi", "e",
];

/// Renders a user symbol as an SMT-LIB symbol, quoting reserved words.
pub fn smt_symbol(name: &str) -> String {
    if SMT_RESERVED.contains(&name) {
        format!("|{name}|")
    } else {
        name.to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(name: &str) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(name), Rational::one());
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value of a polynomial without variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_constant())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().cloned())
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Evaluates under an assignment; returns the first missing symbol on failure.
    pub fn evaluate(&self, assignment: &HashMap<String, Rational>) -> Result<Rational, String> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for f in m.factors() {
                let x = assignment.get(f).ok_or_else(|| f.clone())?;
                v *= x;
            }
            total += v;
        }
        Ok(total)
    }

    /// SMT-LIB prefix form, e.g. `(- a 2.0)`.
    pub fn to_smt(&self) -> String {
        let mut iter = self.terms.iter();
        let Some((m0, c0)) = iter.next() else {
            return "0.0".to_string();
        };
        let mut acc = term_smt(m0, c0, false);
        for (m, c) in iter {
            if c.is_negative() {
                acc = format!("(- {acc} {})", term_smt(m, &c.abs(), true));
            } else {
                acc = format!("(+ {acc} {})", term_smt(m, c, true));
            }
        }
        acc
    }
}

fn term_smt(m: &Monomial, c: &Rational, positive: bool) -> String {
    debug_assert!(!positive || !c.is_negative());
    if m.is_constant() {
        return fmt_smt(c);
    }
    if c.is_one() {
        m.to_smt()
    } else if (-c).is_one() {
        format!("(- {})", m.to_smt())
    } else {
        format!("(* {} {})", fmt_smt(c), m.to_smt())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if m.is_constant() {
                write!(f, "{}", fmt_infix(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", fmt_infix(&abs))?;
                }
                write!(f, "{}", m.factors().join("*"))?;
            }
        }
        Ok(())
    }
}
