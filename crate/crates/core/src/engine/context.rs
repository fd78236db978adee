//! A solver session scoped to the current case, with cached entailment.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::formula::{Formula, Truth};
use crate::solver::{entails_atom, is_sat, CheckResult, Entailment, Solver, SolverError};
use crate::term::RealAtom;

/// A conjunction of literals over real atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Case(pub Vec<RealAtom>);

impl Case {
    pub fn formula(&self) -> Formula {
        Formula::and(self.0.iter().cloned().map(Formula::Atom))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn smt_literals(&self) -> Vec<String> {
        self.0.iter().map(|a| a.to_smt()).collect()
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.smt_literals().join(", "))
    }
}

impl Serialize for Case {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.smt_literals().serialize(s)
    }
}

/// Owns a session holding the assumptions plus one scope per case literal.
///
/// Decided entailments stay valid for every extension of the case they were
/// computed in, so they are looked up through all levels; undetermined
/// results only hold at their own level.
pub struct CaseContext {
    solver: Box<dyn Solver>,
    case: Case,
    cache: Vec<HashMap<RealAtom, Entailment>>,
    queries: usize,
}

impl CaseContext {
    pub fn new(mut solver: Box<dyn Solver>, assumptions: &Formula) -> Result<Self, SolverError> {
        solver.assert(assumptions)?;
        Ok(CaseContext { solver, case: Case::default(), cache: vec![HashMap::new()], queries: 0 })
    }

    pub fn case(&self) -> &Case {
        &self.case
    }

    pub fn backend(&self) -> &'static str {
        self.solver.name()
    }

    /// Number of entailment queries sent to the backend.
    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn solver(&mut self) -> &mut dyn Solver {
        self.solver.as_mut()
    }

    pub fn is_consistent(&mut self) -> Result<bool, SolverError> {
        is_sat(self.solver.as_mut())
    }

    pub fn push_literal(&mut self, atom: RealAtom) -> Result<(), SolverError> {
        self.solver.push()?;
        self.solver.assert(&Formula::Atom(atom.clone()))?;
        self.case.0.push(atom);
        self.cache.push(HashMap::new());
        Ok(())
    }

    pub fn pop_literal(&mut self) -> Result<(), SolverError> {
        if self.case.is_empty() {
            return Err(SolverError::NoScope);
        }
        self.solver.pop()?;
        self.case.0.pop();
        self.cache.pop();
        Ok(())
    }

    /// Enters `case` from the root, replacing the current literals.
    pub fn enter(&mut self, case: &Case) -> Result<(), SolverError> {
        while !self.case.is_empty() {
            self.pop_literal()?;
        }
        for a in &case.0 {
            self.push_literal(a.clone())?;
        }
        Ok(())
    }

    pub fn entail(&mut self, atom: &RealAtom) -> Result<Entailment, SolverError> {
        let top = self.cache.len() - 1;
        for (level, map) in self.cache.iter().enumerate().rev() {
            match map.get(atom) {
                Some(Entailment::Undetermined) if level == top => return Ok(Entailment::Undetermined),
                Some(Entailment::Undetermined) | None => {}
                Some(e) => return Ok(*e),
            }
        }
        let e = match self.cache[top].get(&atom.negate()) {
            Some(Entailment::Entailed) => Entailment::Contradicted,
            Some(Entailment::Contradicted) => Entailment::Entailed,
            Some(Entailment::Undetermined) => Entailment::Undetermined,
            None => {
                self.queries += 1;
                entails_atom(self.solver.as_mut(), atom)?
            }
        };
        self.cache[top].insert(atom.clone(), e);
        Ok(e)
    }

    pub fn truth(&mut self, f: &Formula) -> Result<Truth, SolverError> {
        f.truth(
            &mut |a: &RealAtom| {
                Ok(match self.entail(a)? {
                    Entailment::Entailed => Truth::True,
                    Entailment::Contradicted => Truth::False,
                    Entailment::Undetermined => Truth::Unknown,
                })
            },
            &|_| Truth::Unknown,
        )
    }

    /// Replaces atoms by their entailment; undetermined atoms become `optimistic`.
    pub fn fold(&mut self, f: &Formula, optimistic: bool) -> Result<Formula, SolverError> {
        let mut err = None;
        let folded = f.fold_atoms(&mut |a| match self.entail(a) {
            Ok(Entailment::Entailed) => true,
            Ok(Entailment::Contradicted) => false,
            Ok(Entailment::Undetermined) => optimistic,
            Err(e) => {
                err.get_or_insert(e);
                false
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(folded),
        }
    }

    /// Checks labeled formulas in a temporary scope.
    pub fn check_labeled(&mut self, unlabeled: &[Formula], labeled: &[(String, Formula)]) -> Result<CheckResult, SolverError> {
        self.solver.push()?;
        let result = (|| {
            for f in unlabeled {
                self.solver.assert(f)?;
            }
            for (l, f) in labeled {
                self.solver.assert_labeled(f, Some(l))?;
            }
            self.solver.check()
        })();
        self.solver.pop()?;
        result
    }

    /// Satisfiability of the current case together with `extra`.
    pub fn sat_with(&mut self, extra: &Formula) -> Result<bool, SolverError> {
        self.solver.push()?;
        let result = self.solver.assert(extra).and_then(|_| is_sat(self.solver.as_mut()));
        self.solver.pop()?;
        result
    }
}
