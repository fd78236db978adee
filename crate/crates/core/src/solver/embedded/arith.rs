//! Exact feasibility of conjunctions of polynomial literals.
//!
//! Linear problems are decided by Gaussian elimination of equalities
//! followed by Fourier-Motzkin elimination, with disequalities split into
//! two strict cases. Nonlinear monomials are first treated as independent
//! variables; if that relaxation is feasible, a witness is searched by
//! fixing enough variables to make the rest linear.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::term::{int, ratio, CmpOp, Monomial, Poly, Rational, RealAtom};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Rel {
    Eq,
    Ge,
    Gt,
    Ne,
}

/// `sum(coeffs) + constant rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lin {
    coeffs: BTreeMap<usize, Rational>,
    constant: Rational,
    rel: Rel,
}

impl Lin {
    fn eval(&self, values: &[Rational]) -> Rational {
        let mut total = self.constant.clone();
        for (v, c) in &self.coeffs {
            total += c * &values[*v];
        }
        total
    }

    fn holds_at(&self, values: &[Rational]) -> bool {
        let x = self.eval(values);
        match self.rel {
            Rel::Eq => x.is_zero(),
            Rel::Ge => !x.is_negative(),
            Rel::Gt => x.is_positive(),
            Rel::Ne => !x.is_zero(),
        }
    }

    fn constant_holds(&self) -> bool {
        debug_assert!(self.coeffs.is_empty());
        let x = &self.constant;
        match self.rel {
            Rel::Eq => x.is_zero(),
            Rel::Ge => !x.is_negative(),
            Rel::Gt => x.is_positive(),
            Rel::Ne => !x.is_zero(),
        }
    }

    fn negated(&self, rel: Rel) -> Lin {
        Lin {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, -c)).collect(),
            constant: -&self.constant,
            rel,
        }
    }

    /// Replaces `var` by `expr` (given as coefficients and constant).
    fn substitute(&mut self, var: usize, expr: &(BTreeMap<usize, Rational>, Rational)) {
        let Some(c) = self.coeffs.remove(&var) else { return };
        for (v, k) in &expr.0 {
            let e = self.coeffs.entry(*v).or_insert_with(Rational::zero);
            *e += &c * k;
            if e.is_zero() {
                self.coeffs.remove(v);
            }
        }
        self.constant += &c * &expr.1;
    }

    /// Scales so that the first coefficient has absolute value one.
    fn normalized(mut self) -> Lin {
        if let Some(first) = self.coeffs.values().next() {
            let k = first.abs().recip();
            for c in self.coeffs.values_mut() {
                *c *= &k;
            }
            self.constant *= &k;
        }
        self
    }
}

fn pick_value(lo: Option<(Rational, bool)>, hi: Option<(Rational, bool)>) -> Rational {
    let ok = |x: &Rational| {
        lo.as_ref().map_or(true, |(l, s)| if *s { x > l } else { x >= l })
            && hi.as_ref().map_or(true, |(h, s)| if *s { x < h } else { x <= h })
    };
    let zero = Rational::zero();
    if ok(&zero) {
        return zero;
    }
    match (&lo, &hi) {
        (Some((l, _)), None) => {
            let c = l.ceil();
            if ok(&c) {
                c
            } else {
                c + Rational::one()
            }
        }
        (None, Some((h, _))) => {
            let c = h.floor();
            if ok(&c) {
                c
            } else {
                c - Rational::one()
            }
        }
        (Some((l, _)), Some((h, _))) => {
            for c in [l.ceil(), l.floor() + Rational::one(), h.floor(), h.ceil() - Rational::one()] {
                if ok(&c) {
                    return c;
                }
            }
            (l + h) / int(2)
        }
        (None, None) => zero,
    }
}

/// Feasibility of equalities and non-strict/strict inequalities.
fn fourier_motzkin(constraints: Vec<Lin>, nvars: usize) -> Option<Vec<Rational>> {
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    for c in constraints {
        match c.rel {
            Rel::Eq => eqs.push(c),
            Rel::Ne => unreachable!("disequalities are split before elimination"),
            _ => ineqs.push(c),
        }
    }
    let mut substitutions: Vec<(usize, (BTreeMap<usize, Rational>, Rational))> = Vec::new();
    while let Some(eq) = eqs.pop() {
        let Some((&v, c)) = eq.coeffs.iter().next() else {
            if !eq.constant.is_zero() {
                return None;
            }
            continue;
        };
        let inv = -c.recip();
        let expr: BTreeMap<usize, Rational> =
            eq.coeffs.iter().filter(|(w, _)| **w != v).map(|(w, k)| (*w, k * &inv)).collect();
        let expr = (expr, &eq.constant * &inv);
        for other in eqs.iter_mut().chain(ineqs.iter_mut()) {
            other.substitute(v, &expr);
        }
        substitutions.push((v, expr));
    }

    let mut stages: Vec<(usize, Vec<Lin>)> = Vec::new();
    let mut current: Vec<Lin> = Vec::new();
    let mut seen = HashSet::new();
    for c in ineqs {
        if c.coeffs.is_empty() {
            if !c.constant_holds() {
                return None;
            }
        } else {
            let n = c.normalized();
            if seen.insert(n.clone()) {
                current.push(n);
            }
        }
    }
    loop {
        let vars: BTreeSet<usize> = current.iter().flat_map(|c| c.coeffs.keys().copied()).collect();
        if vars.is_empty() {
            break;
        }
        let cost = |v: usize| {
            let pos = current.iter().filter(|c| c.coeffs.get(&v).is_some_and(|k| k.is_positive())).count();
            let neg = current.iter().filter(|c| c.coeffs.get(&v).is_some_and(|k| k.is_negative())).count();
            pos * neg
        };
        let v = *vars.iter().min_by_key(|v| (cost(**v), **v)).unwrap();
        let (with, without): (Vec<Lin>, Vec<Lin>) = current.into_iter().partition(|c| c.coeffs.contains_key(&v));
        let mut next = without;
        let mut seen: HashSet<Lin> = next.iter().cloned().collect();
        let pos: Vec<&Lin> = with.iter().filter(|c| c.coeffs[&v].is_positive()).collect();
        let neg: Vec<&Lin> = with.iter().filter(|c| c.coeffs[&v].is_negative()).collect();
        for p in &pos {
            for n in &neg {
                let a = &p.coeffs[&v];
                let b = -&n.coeffs[&v];
                let mut coeffs = BTreeMap::new();
                for (w, k) in &p.coeffs {
                    *coeffs.entry(*w).or_insert_with(Rational::zero) += k * &b;
                }
                for (w, k) in &n.coeffs {
                    *coeffs.entry(*w).or_insert_with(Rational::zero) += k * a;
                }
                coeffs.retain(|_, k| !k.is_zero());
                let rel = if p.rel == Rel::Gt || n.rel == Rel::Gt { Rel::Gt } else { Rel::Ge };
                let combined = Lin { coeffs, constant: &p.constant * &b + &n.constant * a, rel };
                if combined.coeffs.is_empty() {
                    if !combined.constant_holds() {
                        return None;
                    }
                    continue;
                }
                let combined = combined.normalized();
                if seen.insert(combined.clone()) {
                    next.push(combined);
                }
            }
        }
        stages.push((v, with));
        current = next;
    }

    let mut values = vec![Rational::zero(); nvars];
    for (v, cons) in stages.iter().rev() {
        let mut lo: Option<(Rational, bool)> = None;
        let mut hi: Option<(Rational, bool)> = None;
        for c in cons {
            let k = &c.coeffs[v];
            let mut rest = c.constant.clone();
            for (w, kw) in &c.coeffs {
                if w != v {
                    rest += kw * &values[*w];
                }
            }
            let bound = -rest / k;
            let strict = c.rel == Rel::Gt;
            if k.is_positive() {
                let tighter = match &lo {
                    None => true,
                    Some((l, s)) => bound > *l || (bound == *l && strict && !s),
                };
                if tighter {
                    lo = Some((bound, strict));
                }
            } else {
                let tighter = match &hi {
                    None => true,
                    Some((h, s)) => bound < *h || (bound == *h && strict && !s),
                };
                if tighter {
                    hi = Some((bound, strict));
                }
            }
        }
        values[*v] = pick_value(lo, hi);
    }
    for (v, (coeffs, constant)) in substitutions.iter().rev() {
        let mut x = constant.clone();
        for (w, k) in coeffs {
            x += k * &values[*w];
        }
        values[*v] = x;
    }
    Some(values)
}

/// Feasibility with disequalities, by case splitting on violated ones.
fn feasible(constraints: &[Lin], nvars: usize) -> Option<Vec<Rational>> {
    let (ne, rest): (Vec<&Lin>, Vec<&Lin>) = constraints.iter().partition(|c| c.rel == Rel::Ne);
    let values = fourier_motzkin(rest.iter().map(|c| (*c).clone()).collect(), nvars)?;
    let Some(violated) = ne.iter().position(|c| !c.holds_at(&values)) else {
        return Some(values);
    };
    let d = ne[violated];
    for branch in [Lin { rel: Rel::Gt, ..d.clone() }, d.negated(Rel::Gt)] {
        let mut next: Vec<Lin> = constraints.iter().filter(|c| *c != d).cloned().collect();
        next.push(branch);
        if let Some(v) = feasible(&next, nvars) {
            return Some(v);
        }
    }
    None
}

/// A polynomial literal `poly op 0`.
#[derive(Clone, Debug)]
pub struct Literal {
    pub poly: Poly,
    pub op: CmpOp,
}

impl Literal {
    pub fn from_atom(atom: &RealAtom, value: bool) -> Literal {
        let op = if value { atom.op() } else { atom.op().negate() };
        Literal { poly: atom.poly().clone(), op }
    }

    fn holds(&self, point: &HashMap<String, Rational>) -> bool {
        match self.poly.evaluate(point) {
            Ok(v) => self.op.holds(&v, &Rational::zero()),
            Err(_) => false,
        }
    }
}

/// Monomials as linear variables.
struct Relaxation {
    index: HashMap<Monomial, usize>,
    monomials: Vec<Monomial>,
}

impl Relaxation {
    fn new() -> Self {
        Relaxation { index: HashMap::new(), monomials: Vec::new() }
    }

    fn var(&mut self, m: &Monomial) -> usize {
        if let Some(&i) = self.index.get(m) {
            return i;
        }
        let i = self.monomials.len();
        self.index.insert(m.clone(), i);
        self.monomials.push(m.clone());
        i
    }

    fn lin(&mut self, lit: &Literal) -> Lin {
        let mut coeffs = BTreeMap::new();
        let mut constant = Rational::zero();
        for (m, c) in lit.poly.terms() {
            if m.is_constant() {
                constant += c;
            } else {
                coeffs.insert(self.var(m), c.clone());
            }
        }
        let base = Lin { coeffs, constant, rel: Rel::Ge };
        match lit.op {
            CmpOp::Eq => Lin { rel: Rel::Eq, ..base },
            CmpOp::Ne => Lin { rel: Rel::Ne, ..base },
            CmpOp::Ge => base,
            CmpOp::Gt => Lin { rel: Rel::Gt, ..base },
            CmpOp::Le => base.negated(Rel::Ge),
            CmpOp::Lt => base.negated(Rel::Gt),
        }
    }

    /// Linear constraints of `lits` plus nonnegativity of even-power monomials.
    fn system(&mut self, lits: &[&Literal]) -> Vec<Lin> {
        let mut out: Vec<Lin> = lits.iter().map(|l| self.lin(l)).collect();
        for (i, m) in self.monomials.clone().iter().enumerate() {
            if m.degree() >= 2 && is_square(m) {
                out.push(Lin { coeffs: BTreeMap::from([(i, Rational::one())]), constant: Rational::zero(), rel: Rel::Ge });
            }
        }
        out
    }
}

fn is_square(m: &Monomial) -> bool {
    let mut counts: HashMap<&String, usize> = HashMap::new();
    for f in m.factors() {
        *counts.entry(f).or_default() += 1;
    }
    counts.values().all(|c| c % 2 == 0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryResult {
    Sat(HashMap<String, Rational>),
    Unsat,
    Unknown(String),
}

fn relaxation_feasible(lits: &[&Literal]) -> Option<(Vec<Rational>, Relaxation)> {
    let mut r = Relaxation::new();
    let sys = r.system(lits);
    let n = r.monomials.len();
    feasible(&sys, n).map(|v| (v, r))
}

/// Partial evaluation of `poly` at the fixed symbols.
fn substitute(poly: &Poly, fixed: &HashMap<String, Rational>) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in poly.terms() {
        let mut coef = c.clone();
        let mut rest = Vec::new();
        for f in m.factors() {
            match fixed.get(f) {
                Some(v) => coef *= v,
                None => rest.push(f.clone()),
            }
        }
        out.add_term(Monomial::from_factors(rest), coef);
    }
    out
}

const ATTEMPTS: usize = 200;

/// Decides the conjunction of `lits`.
pub fn check(lits: &[Literal], rng: &mut ChaCha8Rng) -> TheoryResult {
    let refs: Vec<&Literal> = lits.iter().collect();
    let Some((values, relax)) = relaxation_feasible(&refs) else {
        return TheoryResult::Unsat;
    };
    let symbols: BTreeSet<String> = lits.iter().flat_map(|l| l.poly.vars()).collect();
    let base_point = |values: &[Rational]| -> HashMap<String, Rational> {
        symbols
            .iter()
            .map(|s| {
                let v = relax.index.get(&Monomial::var(s)).map_or_else(Rational::zero, |&i| values[i].clone());
                (s.clone(), v)
            })
            .collect()
    };
    let point = base_point(&values);
    if lits.iter().all(|l| l.holds(&point)) {
        return TheoryResult::Sat(point);
    }
    let nonlinear: Vec<Monomial> = lits
        .iter()
        .flat_map(|l| l.poly.terms().map(|(m, _)| m.clone()).collect::<Vec<_>>())
        .filter(|m| m.degree() >= 2)
        .collect();
    let pool: Vec<Rational> = [0, 1, -1, 2, -2, 3, -3, 5, -5, 10, -10]
        .into_iter()
        .map(int)
        .chain([ratio(1, 2), ratio(-1, 2), ratio(1, 3), ratio(-1, 3)])
        .collect();
    for attempt in 0..ATTEMPTS {
        let mut order: Vec<&String> = symbols.iter().collect();
        order.shuffle(rng);
        let mut fixed: HashMap<String, Rational> = HashMap::new();
        for m in &nonlinear {
            loop {
                let free: Vec<&String> = m.factors().iter().filter(|f| !fixed.contains_key(*f)).collect();
                if free.len() <= 1 {
                    break;
                }
                let pick = order.iter().find(|s| free.contains(s)).copied().unwrap_or(free[0]);
                let v = if attempt == 0 { point[pick].clone() } else { pool[rng.gen_range(0..pool.len())].clone() };
                fixed.insert(pick.clone(), v);
            }
        }
        let reduced: Vec<Literal> =
            lits.iter().map(|l| Literal { poly: substitute(&l.poly, &fixed), op: l.op }).collect();
        let reduced_refs: Vec<&Literal> = reduced.iter().collect();
        let mut r = Relaxation::new();
        let sys: Vec<Lin> = reduced_refs.iter().map(|l| r.lin(l)).collect();
        if r.monomials.iter().any(|m| m.degree() >= 2) {
            continue;
        }
        let Some(values) = feasible(&sys, r.monomials.len()) else { continue };
        let mut candidate = fixed.clone();
        for s in &symbols {
            if !candidate.contains_key(s) {
                let v = r.index.get(&Monomial::var(s)).map_or_else(Rational::zero, |&i| values[i].clone());
                candidate.insert(s.clone(), v);
            }
        }
        if lits.iter().all(|l| l.holds(&candidate)) {
            return TheoryResult::Sat(candidate);
        }
    }
    TheoryResult::Unknown("nonlinear constraints: no witness found and relaxation is feasible".into())
}

/// A subset of `lits` whose linear relaxation is infeasible, shrunk by deletion.
pub fn conflict(lits: &[Literal]) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..lits.len()).collect();
    let mut i = 0;
    while i < keep.len() {
        let trial: Vec<&Literal> = keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, k)| &lits[*k]).collect();
        if relaxation_feasible(&trial).is_none() {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep
}
