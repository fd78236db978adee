//! The case-splitting loop: decide the property formula per case, split on
//! undetermined comparisons named by unsat cores, and aggregate a verdict.

pub mod context;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

pub use context::{Case, CaseContext};

use crate::encode::{encode, EncodeError, PropertyFormula};
use crate::formula::Formula;
use crate::game::{Game, GameError, History, Property};
use crate::solver::{CheckResult, Entailment, Model, SolverConfig, SolverError};
use crate::term::RealAtom;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("solver could not decide a query: {0}")]
    Unknown(String),
    #[error(transparent)]
    Solver(SolverError),
    #[error("initial and {0} constraints are unsatisfiable")]
    InconsistentAssumptions(&'static str),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl From<SolverError> for EngineError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Unknown(r) => EngineError::Unknown(r),
            other => EngineError::Solver(other),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Keep exploring after the first irreducible unsat case.
    pub explore_all: bool,
}

#[derive(Clone, Debug)]
pub enum CaseOutcome {
    Satisfied(Model),
    /// Irreducible: the core names the contradictory requirements.
    Violated(Vec<String>),
    /// Not explored because an earlier case already decided the verdict.
    Skipped,
}

#[derive(Clone, Debug)]
pub enum CaseTree {
    Leaf { case: Case, outcome: CaseOutcome },
    Split { atom: RealAtom, positive: Box<CaseTree>, negative: Box<CaseTree> },
}

impl CaseTree {
    /// Leaves left to right, positive branches first.
    pub fn leaves(&self) -> Vec<(&Case, &CaseOutcome)> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<(&'a Case, &'a CaseOutcome)>) {
        match self {
            CaseTree::Leaf { case, outcome } => out.push((case, outcome)),
            CaseTree::Split { positive, negative, .. } => {
                positive.collect(out);
                negative.collect(out);
            }
        }
    }

    pub fn splits(&self) -> usize {
        match self {
            CaseTree::Leaf { .. } => 0,
            CaseTree::Split { positive, negative, .. } => 1 + positive.splits() + negative.splits(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", content = "case", rename_all = "snake_case")]
pub enum LogEntry {
    Split(String),
    Satisfied(Case),
    Violated(Case),
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogEntry::Split(a) => write!(f, "Require case split on {a}"),
            LogEntry::Satisfied(c) => write!(f, "Case {c} satisfies property."),
            LogEntry::Violated(c) => write!(f, "Case {c} violates property."),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PropertyResult {
    pub property: Property,
    pub history: History,
    pub holds: bool,
    pub tree: CaseTree,
    pub log: Vec<LogEntry>,
    /// Whether every branch was explored.
    pub complete: bool,
}

impl PropertyResult {
    pub fn satisfied_cases(&self) -> Vec<(&Case, &Model)> {
        self.tree
            .leaves()
            .into_iter()
            .filter_map(|(c, o)| match o {
                CaseOutcome::Satisfied(m) => Some((c, m)),
                _ => None,
            })
            .collect()
    }

    pub fn violated_cases(&self) -> Vec<(&Case, &[String])> {
        self.tree
            .leaves()
            .into_iter()
            .filter_map(|(c, o)| match o {
                CaseOutcome::Violated(core) => Some((c, core.as_slice())),
                _ => None,
            })
            .collect()
    }
}

/// One property analysis: the encoded formula plus a live solver session.
pub struct Analyzer<'g> {
    pub game: &'g Game,
    pub formula: PropertyFormula,
    pub ctx: CaseContext,
    universe: usize,
    log: Vec<LogEntry>,
    stopped: bool,
}

impl<'g> Analyzer<'g> {
    pub fn new(game: &'g Game, h: &History, property: Property, config: &SolverConfig) -> Result<Self, EngineError> {
        let formula = encode(game, h, property)?;
        let mut ctx = CaseContext::new(config.open()?, &game.assumptions(property))?;
        if !ctx.is_consistent()? {
            return Err(EngineError::InconsistentAssumptions(property.key()));
        }
        let universe = formula.atom_universe().len();
        Ok(Analyzer { game, formula, ctx, universe, log: Vec::new(), stopped: false })
    }

    pub fn property(&self) -> Property {
        self.formula.property
    }

    /// Checks the formula with atoms folded under the current case.
    pub fn check_case(&mut self, optimistic: bool) -> Result<CheckResult, EngineError> {
        let mut labeled = Vec::new();
        for r in &self.formula.requirements {
            let folded = self.ctx.fold(&r.formula(), optimistic)?;
            if !folded.is_true() {
                labeled.push((r.label.clone(), folded));
            }
        }
        let result = self.ctx.check_labeled(&self.formula.skeleton, &labeled)?;
        if let CheckResult::Unknown(r) = result {
            return Err(EngineError::Unknown(r));
        }
        Ok(result)
    }

    /// Among atoms of core requirements and of honest-forced requirements
    /// whose conclusion already fails, the undetermined one occurring most
    /// often; ties go to document order.
    pub fn pick_split_atom(&mut self, core: &[String]) -> Result<Option<RealAtom>, EngineError> {
        let mut counts: Vec<(RealAtom, usize)> = Vec::new();
        let requirements = self.formula.requirements.clone();
        for r in &requirements {
            let in_core = core.contains(&r.label);
            let failing = self.formula.premise_forced(r) && self.ctx.fold(&r.conclusion, false)?.is_false();
            if !in_core && !failing {
                continue;
            }
            for a in r.conclusion.atoms() {
                if self.ctx.entail(a)? != Entailment::Undetermined {
                    continue;
                }
                match counts.iter_mut().find(|(b, _)| b == a) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((a.clone(), 1)),
                }
            }
        }
        let mut best: Option<(RealAtom, usize)> = None;
        for (a, n) in counts {
            if best.as_ref().map_or(true, |(_, m)| n > *m) {
                best = Some((a, n));
            }
        }
        if best.is_none() {
            for r in &requirements {
                for a in r.conclusion.atoms() {
                    if self.ctx.entail(a)? == Entailment::Undetermined {
                        return Ok(Some(a.clone()));
                    }
                }
            }
        }
        Ok(best.map(|(a, _)| a))
    }

    fn explore(&mut self, opts: EngineOptions) -> Result<CaseTree, EngineError> {
        let case = self.ctx.case().clone();
        if case.len() > self.universe {
            return Err(EngineError::Internal(format!("split depth {} exceeds atom count {}", case.len(), self.universe)));
        }
        let core = match self.check_case(false)? {
            CheckResult::Sat(model) => {
                self.log.push(LogEntry::Satisfied(case.clone()));
                return Ok(CaseTree::Leaf { case, outcome: CaseOutcome::Satisfied(model) });
            }
            CheckResult::Unsat(core) => core,
            CheckResult::Unknown(r) => return Err(EngineError::Unknown(r)),
        };
        if let CheckResult::Unsat(opt_core) = self.check_case(true)? {
            self.log.push(LogEntry::Violated(case.clone()));
            if !opts.explore_all {
                self.stopped = true;
            }
            return Ok(CaseTree::Leaf { case, outcome: CaseOutcome::Violated(opt_core) });
        }
        let atom = self
            .pick_split_atom(&core)?
            .ok_or_else(|| EngineError::Internal(format!("no split candidate in case {case}")))?;
        self.log.push(LogEntry::Split(atom.to_smt()));
        self.ctx.push_literal(atom.clone())?;
        let positive = self.explore(opts);
        self.ctx.pop_literal()?;
        let positive = positive?;
        let negative = if self.stopped {
            let mut c = case.clone();
            c.0.push(atom.negate());
            CaseTree::Leaf { case: c, outcome: CaseOutcome::Skipped }
        } else {
            self.ctx.push_literal(atom.negate())?;
            let negative = self.explore(opts);
            self.ctx.pop_literal()?;
            negative?
        };
        Ok(CaseTree::Split { atom, positive: Box::new(positive), negative: Box::new(negative) })
    }

    pub fn run(&mut self, opts: EngineOptions) -> Result<PropertyResult, EngineError> {
        self.ctx.enter(&Case::default())?;
        self.log.clear();
        self.stopped = false;
        let tree = self.explore(opts)?;
        let leaves = tree.leaves();
        let holds = leaves.iter().all(|(_, o)| matches!(o, CaseOutcome::Satisfied(_)));
        let complete = leaves.iter().all(|(_, o)| !matches!(o, CaseOutcome::Skipped));
        Ok(PropertyResult {
            property: self.property(),
            history: self.formula.history.clone(),
            holds,
            tree,
            log: std::mem::take(&mut self.log),
            complete,
        })
    }

    /// Confirms that the leaf cases of `tree` are exhaustive under the
    /// assumptions and pairwise disjoint.
    pub fn verify_partition(&mut self, tree: &CaseTree) -> Result<bool, EngineError> {
        self.ctx.enter(&Case::default())?;
        let cases: Vec<Case> = tree.leaves().into_iter().map(|(c, _)| c.clone()).collect();
        let none = Formula::and(cases.iter().map(|c| c.formula().not()));
        if self.ctx.sat_with(&none)? {
            return Ok(false);
        }
        for i in 0..cases.len() {
            for j in i + 1..cases.len() {
                if self.ctx.sat_with(&Formula::and([cases[i].formula(), cases[j].formula()]))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Decides `property` for history `h`.
pub fn check_property(
    game: &Game,
    h: &History,
    property: Property,
    config: &SolverConfig,
    opts: EngineOptions,
) -> Result<PropertyResult, EngineError> {
    Analyzer::new(game, h, property, config)?.run(opts)
}

/// Honest choices as a map from node to action, for reporting.
pub fn honest_actions(game: &Game, h: &History) -> Result<HashMap<usize, String>, GameError> {
    let honest = game.tree.honest_choices(h)?;
    Ok(honest.into_iter().map(|(n, c)| (n, game.tree.children(n)[c].action.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::parse_game;
    use crate::solver::testing::backends;

    fn two_player() -> Game {
        parse_game(include_str!("../../games/two_player.json")).unwrap()
    }

    fn literals(c: &Case) -> Vec<String> {
        c.smt_literals()
    }

    #[test]
    fn two_player_weak_immunity_cases() {
        let g = two_player();
        let h = g.honest_histories[0].clone();
        for cfg in backends() {
            let r = check_property(&g, &h, Property::WeakImmunity, &cfg, EngineOptions::default()).unwrap();
            assert!(!r.holds);
            let log: Vec<String> = r.log.iter().map(|l| l.to_string()).collect();
            assert_eq!(
                log,
                [
                    "Require case split on (>= b 0.0)",
                    "Require case split on (>= (- a 2.0) 0.0)",
                    "Case [(>= b 0.0), (>= (- a 2.0) 0.0)] satisfies property.",
                    "Case [(>= b 0.0), (< (- a 2.0) 0.0)] violates property.",
                ]
            );
            let leaves = r.tree.leaves();
            assert_eq!(literals(leaves[2].0), ["(< b 0.0)"]);
            assert!(matches!(leaves[2].1, CaseOutcome::Skipped));
            assert!(!r.complete);

            let mut an = Analyzer::new(&g, &h, Property::WeakImmunity, &cfg).unwrap();
            let all = an.run(EngineOptions { explore_all: true }).unwrap();
            assert!(all.complete);
            assert_eq!(all.violated_cases().len(), 2);
            assert_eq!(all.satisfied_cases().len(), 1);
            assert!(an.verify_partition(&all.tree).unwrap());
        }
    }

    #[test]
    fn two_player_practicality_needs_no_split() {
        let g = two_player();
        let h = g.honest_histories[0].clone();
        for cfg in backends() {
            let r = check_property(&g, &h, Property::Practicality, &cfg, EngineOptions::default()).unwrap();
            assert!(!r.holds);
            assert_eq!(r.tree.splits(), 0);
        }
    }

    #[test]
    fn two_player_collusion_fails_outright() {
        let g = two_player();
        let h = g.honest_histories[0].clone();
        for cfg in backends() {
            let r = check_property(&g, &h, Property::CollusionResilience, &cfg, EngineOptions::default()).unwrap();
            assert!(!r.holds);
            assert_eq!(r.tree.splits(), 0);
        }
    }

    #[test]
    fn inconsistent_assumptions_are_rejected() {
        let g = two_player();
        let g = g.with_initial_constraints([crate::term::parse_constraint("a < 0", &g.symbols).unwrap()]);
        let h = g.honest_histories[0].clone();
        let cfg = SolverConfig::with_backend(crate::solver::BackendKind::Embedded);
        assert!(matches!(
            Analyzer::new(&g, &h, Property::WeakImmunity, &cfg),
            Err(EngineError::InconsistentAssumptions(_))
        ));
    }
}
