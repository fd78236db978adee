//! In-process backend: a CDCL solver over a Tseitin encoding, with real
//! atoms checked lazily by the exact procedure in [`arith`].
//!
//! Every scope owns an activation literal and every labeled assertion a
//! selector literal; both are passed as assumptions, so failed assumptions
//! give unsat cores. Theory conflicts become global lemma clauses, which
//! stay valid across scopes.

pub mod arith;

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varisat::{ExtendFormula, Lit, Var};

use super::{Model, ModelValue, Solver, SolverError, Status};
use crate::formula::Formula;
use crate::term::{CmpOp, Poly, Rational, RealAtom};
use arith::{Literal, TheoryResult};

struct Scope {
    activation: Option<Lit>,
    selectors: Vec<(String, Lit)>,
    atoms: Vec<Var>,
}

enum Outcome {
    Sat(Model),
    Unsat(Vec<String>),
}

pub struct EmbeddedSolver {
    sat: varisat::Solver<'static>,
    true_lit: Lit,
    atoms: HashMap<(Poly, CmpOp), Var>,
    atom_of_var: HashMap<Var, RealAtom>,
    bools: HashMap<String, Lit>,
    reals: BTreeSet<String>,
    scopes: Vec<Scope>,
    rng: ChaCha8Rng,
    last: Option<Outcome>,
}

/// The positive form of an atom and whether `atom` is that form.
fn positive_form(atom: &RealAtom) -> (RealAtom, bool) {
    match atom.op() {
        CmpOp::Eq | CmpOp::Ge | CmpOp::Gt => (atom.clone(), true),
        _ => (atom.negate(), false),
    }
}

impl EmbeddedSolver {
    pub fn new(seed: u64) -> Self {
        let mut sat = varisat::Solver::new();
        let true_lit = sat.new_lit();
        sat.add_clause(&[true_lit]);
        EmbeddedSolver {
            sat,
            true_lit,
            atoms: HashMap::new(),
            atom_of_var: HashMap::new(),
            bools: HashMap::new(),
            reals: BTreeSet::new(),
            scopes: vec![Scope { activation: None, selectors: Vec::new(), atoms: Vec::new() }],
            rng: ChaCha8Rng::seed_from_u64(seed),
            last: None,
        }
    }

    fn atom_lit(&mut self, atom: &RealAtom) -> Lit {
        let (pos, same) = positive_form(atom);
        let key = (pos.poly().clone(), pos.op());
        let var = match self.atoms.get(&key) {
            Some(v) => *v,
            None => {
                let v = self.sat.new_var();
                self.atoms.insert(key, v);
                self.atom_of_var.insert(v, pos);
                v
            }
        };
        self.scopes.last_mut().unwrap().atoms.push(var);
        Lit::from_var(var, same)
    }

    fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::Const(true) => self.true_lit,
            Formula::Const(false) => !self.true_lit,
            Formula::Atom(a) => self.atom_lit(a),
            Formula::Var(v) => self.bool_lit(v),
            Formula::NotVar(v) => !self.bool_lit(v),
            Formula::And(ps) => {
                let x = self.sat.new_lit();
                for p in ps {
                    let l = self.encode(p);
                    self.sat.add_clause(&[!x, l]);
                }
                x
            }
            Formula::Or(ps) => {
                let x = self.sat.new_lit();
                let mut clause = vec![!x];
                for p in ps {
                    clause.push(self.encode(p));
                }
                self.sat.add_clause(&clause);
                x
            }
        }
    }

    fn bool_lit(&mut self, name: &str) -> Lit {
        if let Some(l) = self.bools.get(name) {
            return *l;
        }
        let l = self.sat.new_lit();
        self.bools.insert(name.to_string(), l);
        l
    }

    fn assumptions(&self) -> Vec<Lit> {
        let mut out = Vec::new();
        for s in &self.scopes {
            out.extend(s.activation);
            out.extend(s.selectors.iter().map(|(_, l)| *l));
        }
        out
    }

    fn active_atoms(&self) -> Vec<Var> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in &self.scopes {
            for v in &s.atoms {
                if seen.insert(*v) {
                    out.push(*v);
                }
            }
        }
        out
    }

    fn solve(&mut self) -> Result<Status, SolverError> {
        let assumptions = self.assumptions();
        let atoms = self.active_atoms();
        loop {
            self.sat.assume(&assumptions);
            let sat = self.sat.solve().map_err(|e| SolverError::Process(format!("sat solver: {e:?}")))?;
            if !sat {
                let failed: HashSet<Lit> = self.sat.failed_core().unwrap_or(&[]).iter().copied().collect();
                let core = self
                    .scopes
                    .iter()
                    .flat_map(|s| s.selectors.iter())
                    .filter(|(_, l)| failed.contains(l))
                    .map(|(name, _)| name.clone())
                    .collect();
                self.last = Some(Outcome::Unsat(core));
                return Ok(Status::Unsat);
            }
            let assignment: HashSet<Lit> = self.sat.model().unwrap_or_default().into_iter().collect();
            let value = |v: Var| assignment.contains(&Lit::positive(v));
            let chosen: Vec<(Var, bool)> = atoms.iter().map(|v| (*v, value(*v))).collect();
            let lits: Vec<Literal> =
                chosen.iter().map(|(v, b)| Literal::from_atom(&self.atom_of_var[v], *b)).collect();
            match arith::check(&lits, &mut self.rng) {
                TheoryResult::Sat(point) => {
                    let mut model = Model::default();
                    for r in &self.reals {
                        let v = point.get(r).cloned().unwrap_or_else(|| Rational::from_integer(0.into()));
                        model.reals.insert(r.clone(), ModelValue::Rational(v));
                    }
                    for (name, l) in &self.bools {
                        model.bools.insert(name.clone(), assignment.contains(l));
                    }
                    self.last = Some(Outcome::Sat(model));
                    return Ok(Status::Sat);
                }
                TheoryResult::Unsat => {
                    let lemma: Vec<Lit> = arith::conflict(&lits)
                        .into_iter()
                        .map(|i| {
                            let (v, b) = chosen[i];
                            Lit::from_var(v, !b)
                        })
                        .collect();
                    self.sat.add_clause(&lemma);
                }
                TheoryResult::Unknown(reason) => {
                    self.last = None;
                    return Ok(Status::Unknown(reason));
                }
            }
        }
    }
}

impl Solver for EmbeddedSolver {
    fn push(&mut self) -> Result<(), SolverError> {
        self.last = None;
        let act = self.sat.new_lit();
        self.scopes.push(Scope { activation: Some(act), selectors: Vec::new(), atoms: Vec::new() });
        Ok(())
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        if self.scopes.len() < 2 {
            return Err(SolverError::NoScope);
        }
        self.last = None;
        let scope = self.scopes.pop().unwrap();
        for l in scope.activation.into_iter().chain(scope.selectors.iter().map(|(_, l)| *l)) {
            self.sat.add_clause(&[!l]);
        }
        Ok(())
    }

    fn assert_labeled(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError> {
        self.last = None;
        if let Some(l) = label {
            if self.scopes.iter().any(|s| s.selectors.iter().any(|(n, _)| n == l)) {
                return Err(SolverError::DuplicateLabel(l.to_string()));
            }
        }
        self.reals.extend(f.real_symbols());
        for v in f.bool_vars() {
            self.bool_lit(&v);
        }
        let root = self.encode(f);
        let guard = match label {
            Some(l) => {
                let s = self.sat.new_lit();
                self.scopes.last_mut().unwrap().selectors.push((l.to_string(), s));
                Some(s)
            }
            None => self.scopes.last().unwrap().activation,
        };
        match guard {
            Some(g) => self.sat.add_clause(&[!g, root]),
            None => self.sat.add_clause(&[root]),
        }
        Ok(())
    }

    fn check_status(&mut self) -> Result<Status, SolverError> {
        self.solve()
    }

    fn model(&mut self) -> Result<Model, SolverError> {
        match &self.last {
            Some(Outcome::Sat(m)) => Ok(m.clone()),
            _ => Err(SolverError::NoResult),
        }
    }

    fn unsat_core(&mut self) -> Result<Vec<String>, SolverError> {
        match &self.last {
            Some(Outcome::Unsat(c)) => Ok(c.clone()),
            _ => Err(SolverError::NoResult),
        }
    }

    fn name(&self) -> &'static str {
        "embedded"
    }
}
