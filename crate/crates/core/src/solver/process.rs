//! External solver process speaking SMT-LIB 2 over pipes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use super::sexpr::{self, Balance, SExpr};
use super::smtlib;
use super::{Model, ModelValue, Solver, SolverConfig, SolverError, Status};
use crate::formula::Formula;

/// Environment variable naming the solver executable; empty disables it.
pub const Z3_ENV: &str = "CHECKMATE_Z3";

/// Location of the external solver, if any.
pub fn z3_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os(Z3_ENV) {
        return if p.is_empty() { None } else { Some(PathBuf::from(p)) };
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join("z3")).find(|p| p.is_file())
}

pub struct ProcessSolver {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    declared: BTreeMap<String, &'static str>,
    /// User labels live in each scope.
    scopes: Vec<Vec<String>>,
    live_labels: HashSet<String>,
    internal_to_user: HashMap<String, String>,
    user_to_internal: HashMap<String, String>,
    next_label: usize,
    last: Option<Status>,
}

impl ProcessSolver {
    pub fn spawn(config: &SolverConfig) -> Result<Self, SolverError> {
        let path = z3_path().ok_or_else(|| SolverError::Process("no z3 executable found".into()))?;
        let mut child = Command::new(&path)
            .args(["-in", "-smt2"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Process(format!("{}: {e}", path.display())))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut s = ProcessSolver {
            child,
            stdin,
            stdout,
            declared: BTreeMap::new(),
            scopes: vec![Vec::new()],
            live_labels: HashSet::new(),
            internal_to_user: HashMap::new(),
            user_to_internal: HashMap::new(),
            next_label: 0,
            last: None,
        };
        s.send("(set-option :print-success false)")?;
        s.send("(set-option :produce-unsat-cores true)")?;
        s.send("(set-option :produce-models true)")?;
        s.send("(set-option :global-declarations true)")?;
        s.send(&format!("(set-option :random-seed {})", config.seed % (u32::MAX as u64)))?;
        if let Some(ms) = config.timeout_ms {
            s.send(&format!("(set-option :timeout {ms})"))?;
        }
        s.send("(set-logic QF_NRA)")?;
        Ok(s)
    }

    fn send(&mut self, command: &str) -> Result<(), SolverError> {
        writeln!(self.stdin, "{command}").map_err(|e| SolverError::Process(e.to_string()))
    }

    fn flush(&mut self) -> Result<(), SolverError> {
        self.stdin.flush().map_err(|e| SolverError::Process(e.to_string()))
    }

    fn read_response(&mut self) -> Result<SExpr, SolverError> {
        self.flush()?;
        let mut text = String::new();
        let mut balance = Balance::default();
        loop {
            let mut line = String::new();
            let n = self.stdout.read_line(&mut line).map_err(|e| SolverError::Process(e.to_string()))?;
            if n == 0 {
                return Err(SolverError::Process("solver terminated unexpectedly".into()));
            }
            balance.feed(&line);
            text.push_str(&line);
            if balance.complete() {
                break;
            }
        }
        let e = sexpr::parse(&text).map_err(|e| SolverError::Protocol(e.to_string()))?;
        if let Some([SExpr::Atom(head), msg]) = e.as_list() {
            if head == "error" {
                return Err(SolverError::Protocol(msg.to_string()));
            }
        }
        Ok(e)
    }

    fn declare_symbols(&mut self, f: &Formula) -> Result<(), SolverError> {
        let mut fresh = Vec::new();
        for s in f.real_symbols() {
            if !self.declared.contains_key(&s) {
                fresh.push((s, "Real"));
            }
        }
        for v in f.bool_vars() {
            if !self.declared.contains_key(&v) {
                fresh.push((v, "Bool"));
            }
        }
        for (name, sort) in fresh {
            self.send(&smtlib::declare(&name, sort))?;
            self.declared.insert(name, sort);
        }
        Ok(())
    }
}

impl Solver for ProcessSolver {
    fn push(&mut self) -> Result<(), SolverError> {
        self.last = None;
        self.scopes.push(Vec::new());
        self.send("(push 1)")
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        if self.scopes.len() < 2 {
            return Err(SolverError::NoScope);
        }
        self.last = None;
        for l in self.scopes.pop().unwrap() {
            self.live_labels.remove(&l);
        }
        self.send("(pop 1)")
    }

    fn assert_labeled(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError> {
        self.last = None;
        self.declare_symbols(f)?;
        let named = match label {
            Some(l) => {
                if !self.live_labels.insert(l.to_string()) {
                    return Err(SolverError::DuplicateLabel(l.to_string()));
                }
                self.scopes.last_mut().unwrap().push(l.to_string());
                let internal = format!("lbl.{}", self.next_label);
                self.next_label += 1;
                self.internal_to_user.insert(internal.clone(), l.to_string());
                self.user_to_internal.insert(l.to_string(), internal.clone());
                Some(internal)
            }
            None => None,
        };
        self.send(&smtlib::assertion(f, named))
    }

    fn check_status(&mut self) -> Result<Status, SolverError> {
        self.send("(check-sat)")?;
        let status = match self.read_response()?.as_atom() {
            Some("sat") => Status::Sat,
            Some("unsat") => Status::Unsat,
            Some("unknown") => {
                self.send("(get-info :reason-unknown)")?;
                let reason = self.read_response()?;
                let text = match reason.as_list() {
                    Some([_, r]) => match r {
                        SExpr::Str(s) => s.clone(),
                        other => other.to_string(),
                    },
                    _ => reason.to_string(),
                };
                Status::Unknown(text)
            }
            _ => return Err(SolverError::Protocol("expected sat, unsat or unknown".into())),
        };
        self.last = Some(status.clone());
        Ok(status)
    }

    fn model(&mut self) -> Result<Model, SolverError> {
        if self.last != Some(Status::Sat) {
            return Err(SolverError::NoResult);
        }
        let mut model = Model::default();
        if self.declared.is_empty() {
            return Ok(model);
        }
        let names: Vec<String> = self.declared.keys().map(|n| smtlib::quote(n)).collect();
        self.send(&format!("(get-value ({}))", names.join(" ")))?;
        let response = self.read_response()?;
        let pairs = response.as_list().ok_or_else(|| SolverError::Protocol(response.to_string()))?;
        for pair in pairs {
            let Some([sym, value]) = pair.as_list() else {
                return Err(SolverError::Protocol(pair.to_string()));
            };
            let name = sym.symbol_name().ok_or_else(|| SolverError::Protocol(pair.to_string()))?;
            match self.declared.get(&name) {
                Some(&"Bool") => {
                    let b = match value.as_atom() {
                        Some("true") => true,
                        Some("false") => false,
                        _ => return Err(SolverError::Protocol(pair.to_string())),
                    };
                    model.bools.insert(name, b);
                }
                _ => {
                    let v = match value.as_rational() {
                        Some(r) => ModelValue::Rational(r),
                        None => ModelValue::Algebraic(value.to_string()),
                    };
                    model.reals.insert(name, v);
                }
            }
        }
        Ok(model)
    }

    fn unsat_core(&mut self) -> Result<Vec<String>, SolverError> {
        if self.last != Some(Status::Unsat) {
            return Err(SolverError::NoResult);
        }
        self.send("(get-unsat-core)")?;
        let response = self.read_response()?;
        let items = response.as_list().ok_or_else(|| SolverError::Protocol(response.to_string()))?;
        let mut core = Vec::new();
        for item in items {
            let name = item.symbol_name().ok_or_else(|| SolverError::Protocol(item.to_string()))?;
            match self.internal_to_user.get(&name) {
                Some(user) => core.push(user.clone()),
                None => return Err(SolverError::Protocol(format!("unknown core label {name}"))),
            }
        }
        core.sort_by_key(|l| self.user_to_internal[l][4..].parse::<usize>().unwrap_or(usize::MAX));
        Ok(core)
    }

    fn name(&self) -> &'static str {
        "z3"
    }
}

impl Drop for ProcessSolver {
    fn drop(&mut self) {
        let _ = self.send("(exit)");
        let _ = self.flush();
        if self.child.try_wait().ok().flatten().is_none() {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}
