//! Decision procedures for quantifier-free real arithmetic with Boolean
//! structure, behind one session interface.
//!
//! Two backends exist: an external solver process spoken to over SMT-LIB 2
//! text, and an embedded procedure (CDCL plus exact linear elimination).

pub mod embedded;
pub mod process;
pub mod sexpr;
pub mod smtlib;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::term::{RealAtom, Rational};

pub use embedded::EmbeddedSolver;
pub use process::ProcessSolver;

/// Value of a real symbol in a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelValue {
    Rational(Rational),
    /// An irrational algebraic number, kept in the solver's notation.
    Algebraic(String),
}

impl ModelValue {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ModelValue::Rational(r) => Some(r),
            ModelValue::Algebraic(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub reals: BTreeMap<String, ModelValue>,
    pub bools: BTreeMap<String, bool>,
}

impl Model {
    pub fn bool(&self, name: &str) -> Option<bool> {
        self.bools.get(name).copied()
    }

    /// The rational part of the model, if every real value is rational.
    pub fn rational_assignment(&self) -> Option<std::collections::HashMap<String, Rational>> {
        self.reals.iter().map(|(k, v)| v.as_rational().map(|r| (k.clone(), r.clone()))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat(Model),
    /// Labels of an unsatisfiable subset of the labeled assertions.
    Unsat(Vec<String>),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("label `{0}` is already asserted")]
    DuplicateLabel(String),
    #[error("pop without matching push")]
    NoScope,
    #[error("solver returned unknown: {0}")]
    Unknown(String),
    #[error("solver process failed: {0}")]
    Process(String),
    #[error("unexpected solver response: {0}")]
    Protocol(String),
    #[error("model or core requested without a matching check result")]
    NoResult,
}

/// One incremental solving session.
pub trait Solver {
    fn push(&mut self) -> Result<(), SolverError>;
    fn pop(&mut self) -> Result<(), SolverError>;
    /// Conjoins `f`; labeled assertions are eligible for unsat cores.
    fn assert_labeled(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError>;
    fn check_status(&mut self) -> Result<Status, SolverError>;
    /// Model after a `Sat` status, total over every symbol asserted so far.
    fn model(&mut self) -> Result<Model, SolverError>;
    /// Core after an `Unsat` status.
    fn unsat_core(&mut self) -> Result<Vec<String>, SolverError>;
    fn name(&self) -> &'static str;

    fn assert(&mut self, f: &Formula) -> Result<(), SolverError> {
        self.assert_labeled(f, None)
    }

    fn check(&mut self) -> Result<CheckResult, SolverError> {
        Ok(match self.check_status()? {
            Status::Sat => CheckResult::Sat(self.model()?),
            Status::Unsat => CheckResult::Unsat(self.unsat_core()?),
            Status::Unknown(r) => CheckResult::Unknown(r),
        })
    }
}

/// Outcome of an entailment query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entailment {
    Entailed,
    Contradicted,
    Undetermined,
}

/// Whether the current session content decides `f`.
pub fn entails_formula(s: &mut dyn Solver, f: &Formula) -> Result<Entailment, SolverError> {
    let sat_with = |s: &mut dyn Solver, g: &Formula| -> Result<bool, SolverError> {
        s.push()?;
        s.assert(g)?;
        let st = s.check_status();
        s.pop()?;
        match st? {
            Status::Sat => Ok(true),
            Status::Unsat => Ok(false),
            Status::Unknown(r) => Err(SolverError::Unknown(r)),
        }
    };
    if !sat_with(s, &f.clone().not())? {
        return Ok(Entailment::Entailed);
    }
    if !sat_with(s, f)? {
        return Ok(Entailment::Contradicted);
    }
    Ok(Entailment::Undetermined)
}

pub fn entails_atom(s: &mut dyn Solver, atom: &RealAtom) -> Result<Entailment, SolverError> {
    entails_formula(s, &Formula::Atom(atom.clone()))
}

/// Decides `atom` relative to `context` in a scope of its own.
pub fn entails(s: &mut dyn Solver, context: &[Formula], atom: &RealAtom) -> Result<Entailment, SolverError> {
    s.push()?;
    let result = context.iter().try_for_each(|c| s.assert(c)).and_then(|_| entails_atom(s, atom));
    s.pop()?;
    result
}

/// Whether the session content is satisfiable.
pub fn is_sat(s: &mut dyn Solver) -> Result<bool, SolverError> {
    match s.check_status()? {
        Status::Sat => Ok(true),
        Status::Unsat => Ok(false),
        Status::Unknown(r) => Err(SolverError::Unknown(r)),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// The external solver when one is installed, otherwise the embedded one.
    #[default]
    Auto,
    Z3,
    Embedded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: BackendKind,
    pub seed: u64,
    pub timeout_ms: Option<u64>,
    /// Directory receiving one `.smt2` file per check.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { backend: BackendKind::Auto, seed: 0, timeout_ms: None, dump_dir: None }
    }
}

impl SolverConfig {
    pub fn with_backend(backend: BackendKind) -> Self {
        SolverConfig { backend, ..Self::default() }
    }

    /// The backend `Auto` resolves to in this environment.
    pub fn resolved_backend(&self) -> BackendKind {
        match self.backend {
            BackendKind::Auto if process::z3_path().is_some() => BackendKind::Z3,
            BackendKind::Auto => BackendKind::Embedded,
            other => other,
        }
    }

    pub fn open(&self) -> Result<Box<dyn Solver>, SolverError> {
        let inner: Box<dyn Solver> = match self.resolved_backend() {
            BackendKind::Z3 => Box::new(ProcessSolver::spawn(self)?),
            _ => Box::new(EmbeddedSolver::new(self.seed)),
        };
        Ok(match &self.dump_dir {
            Some(dir) => Box::new(DumpingSolver::new(inner, dir.clone())),
            None => inner,
        })
    }
}

static QUERY_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Writes the full assertion stack of every check to a numbered file.
pub struct DumpingSolver {
    inner: Box<dyn Solver>,
    dir: PathBuf,
    scopes: Vec<Vec<String>>,
    declared: BTreeMap<String, &'static str>,
}

impl DumpingSolver {
    pub fn new(inner: Box<dyn Solver>, dir: PathBuf) -> Self {
        DumpingSolver { inner, dir, scopes: vec![Vec::new()], declared: BTreeMap::new() }
    }

    fn write(&self) -> Result<(), SolverError> {
        let n = QUERY_COUNTER.fetch_add(1, Ordering::SeqCst);
        let mut text = String::from("(set-logic QF_NRA)\n");
        for (name, sort) in &self.declared {
            text.push_str(&smtlib::declare(name, sort));
            text.push('\n');
        }
        for line in self.scopes.iter().flatten() {
            text.push_str(line);
            text.push('\n');
        }
        text.push_str("(check-sat)\n");
        std::fs::create_dir_all(&self.dir).map_err(|e| SolverError::Process(e.to_string()))?;
        let path = self.dir.join(format!("query-{n:04}.smt2"));
        std::fs::write(&path, text).map_err(|e| SolverError::Process(format!("{}: {e}", path.display())))
    }
}

impl Solver for DumpingSolver {
    fn push(&mut self) -> Result<(), SolverError> {
        self.scopes.push(Vec::new());
        self.inner.push()
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        if self.scopes.len() > 1 {
            self.scopes.pop();
        }
        self.inner.pop()
    }

    fn assert_labeled(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError> {
        for s in f.real_symbols() {
            self.declared.insert(s, "Real");
        }
        for v in f.bool_vars() {
            self.declared.insert(v, "Bool");
        }
        self.scopes.last_mut().unwrap().push(smtlib::assertion(f, label.map(smtlib::quote)));
        self.inner.assert_labeled(f, label)
    }

    fn check_status(&mut self) -> Result<Status, SolverError> {
        self.write()?;
        self.inner.check_status()
    }

    fn model(&mut self) -> Result<Model, SolverError> {
        self.inner.model()
    }

    fn unsat_core(&mut self) -> Result<Vec<String>, SolverError> {
        self.inner.unsat_core()
    }

    fn name(&self) -> &'static str {
        self.inner.name()
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Every backend available here.
    pub fn backends() -> Vec<SolverConfig> {
        let mut out = vec![SolverConfig::with_backend(BackendKind::Embedded)];
        if process::z3_path().is_some() {
            out.push(SolverConfig::with_backend(BackendKind::Z3));
        }
        out
    }
}
