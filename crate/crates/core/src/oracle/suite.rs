//! Instance-level checks shared by the acceptance suites: partition and
//! precondition closure on every run, and oracle sampling of symbolic games.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{eval, oracle_check, random_game, ConcreteGame, DiffError, GenParams, OracleError, Value};
use crate::analysis::{verify_precondition, weakest_precondition};
use crate::engine::{Analyzer, Case, EngineError, EngineOptions, PropertyResult};
use crate::game::{Game, History, Property};
use crate::solver::{SolverConfig, Status};
use crate::term::{int, ratio, Expr, Poly, Rational, RealAtom};

/// What appending the precondition to the initial constraints did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// The property now holds.
    Holds,
    /// The precondition is unsatisfiable under the assumptions.
    Vacuous,
    Fails,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceCheck {
    pub holds: bool,
    pub partition: bool,
    pub precondition: Option<String>,
    pub precondition_verified: Option<bool>,
    pub closure: Option<Closure>,
}

/// Runs `property` exploring every case, verifies the partition, and for a
/// violation computes, verifies and re-imposes the weakest precondition.
pub fn check_instance(
    game: &Game,
    h: &History,
    property: Property,
    config: &SolverConfig,
) -> Result<(PropertyResult, InstanceCheck), DiffError> {
    let mut an = Analyzer::new(game, h, property, config)?;
    let result = an.run(EngineOptions { explore_all: true })?;
    let partition = an.verify_partition(&result.tree)?;
    let mut check =
        InstanceCheck { holds: result.holds, partition, precondition: None, precondition_verified: None, closure: None };
    if !result.holds {
        let violated: Vec<Case> = result.violated_cases().into_iter().map(|(c, _)| c.clone()).collect();
        let wp = weakest_precondition(&mut an.ctx, &violated)?;
        check.precondition_verified = Some(verify_precondition(&mut an.ctx, &wp, &violated)?);
        check.precondition = Some(wp.to_smt());
        let strengthened = game.with_initial_constraints(wp.to_constraints());
        check.closure = Some(match Analyzer::new(&strengthened, h, property, config) {
            Err(EngineError::InconsistentAssumptions(_)) => Closure::Vacuous,
            Err(e) => return Err(e.into()),
            Ok(mut again) => {
                if again.run(EngineOptions::default())?.holds {
                    Closure::Holds
                } else {
                    Closure::Fails
                }
            }
        });
    }
    Ok((result, check))
}

/// Counts over many [`check_instance`] runs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ClosureStats {
    pub instances: usize,
    pub violations: usize,
    pub partition_failures: usize,
    pub unverified_preconditions: usize,
    pub closure_failures: usize,
    pub vacuous_closures: usize,
}

impl ClosureStats {
    pub fn record(&mut self, c: &InstanceCheck) {
        self.instances += 1;
        self.violations += usize::from(!c.holds);
        self.partition_failures += usize::from(!c.partition);
        self.unverified_preconditions += usize::from(c.precondition_verified == Some(false));
        self.closure_failures += usize::from(c.closure == Some(Closure::Fails));
        self.vacuous_closures += usize::from(c.closure == Some(Closure::Vacuous));
    }

    pub fn ok(&self) -> bool {
        self.partition_failures == 0 && self.unverified_preconditions == 0 && self.closure_failures == 0
    }
}

/// [`check_instance`] for every property and history of `game`.
pub fn check_game(game: &Game, config: &SolverConfig, stats: &mut ClosureStats) -> Result<(), DiffError> {
    for property in Property::ALL {
        for h in &game.honest_histories {
            stats.record(&check_instance(game, h, property, config)?.1);
        }
    }
    Ok(())
}

/// [`check_game`] over `count` generated games starting at `params.seed`.
pub fn closure_run(params: &GenParams, count: usize, config: &SolverConfig) -> Result<ClosureStats, DiffError> {
    let mut stats = ClosureStats::default();
    for i in 0..count as u64 {
        let game = random_game(&GenParams { seed: params.seed + i, ..params.clone() });
        check_game(&game, config, &mut stats)?;
    }
    Ok(stats)
}

/// Exact value of a polynomial with infinitesimals as `(0, 1)`.
pub fn poly_value(p: &Poly, game: &Game, env: &HashMap<String, Rational>) -> Result<Value, OracleError> {
    let mut e = Expr::Lit(int(0));
    for (m, c) in p.terms() {
        let t = m
            .factors()
            .iter()
            .fold(Expr::Lit(c.clone()), |acc, f| Expr::Mul(Box::new(acc), Box::new(Expr::sym(f))));
        e = Expr::Add(Box::new(e), Box::new(t));
    }
    eval(&e, game, env)
}

/// Truth of an atom at an assignment, under the lexicographic order.
pub fn atom_holds(a: &RealAtom, game: &Game, env: &HashMap<String, Rational>) -> Result<bool, OracleError> {
    Ok(a.op().holds(&poly_value(a.poly(), game, env)?, &(int(0), int(0))))
}

pub fn case_contains(case: &Case, game: &Game, env: &HashMap<String, Rational>) -> Result<bool, OracleError> {
    for a in &case.0 {
        if !atom_holds(a, game, env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleViolation {
    pub seed: u64,
    pub property: Property,
    pub verdict: bool,
    pub assignment: BTreeMap<String, String>,
    pub case: Option<Case>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SampleReport {
    pub games: usize,
    pub yes: usize,
    pub no: usize,
    /// Oracle calls made.
    pub points: usize,
    /// NO verdicts with no sampled point inside any violated case.
    pub unwitnessed: usize,
    pub violations: Vec<SampleViolation>,
    pub closure: ClosureStats,
}

/// A model of the assumptions and `case`, restricted to the constants.
fn case_model(game: &Game, property: Property, case: &Case, config: &SolverConfig) -> Result<Option<HashMap<String, Rational>>, DiffError> {
    let mut s = config.open().map_err(EngineError::from)?;
    s.assert(&game.assumptions(property)).map_err(EngineError::from)?;
    s.assert(&case.formula()).map_err(EngineError::from)?;
    if s.check_status().map_err(EngineError::from)? != Status::Sat {
        return Ok(None);
    }
    let model = s.model().map_err(EngineError::from)?;
    let Some(mut point) = model.rational_assignment() else { return Ok(None) };
    point.retain(|k, _| !game.symbols.is_infinitesimal(k));
    Ok(Some(point))
}

fn random_point(constants: &[String], rng: &mut ChaCha8Rng) -> HashMap<String, Rational> {
    constants.iter().map(|c| (c.clone(), ratio(rng.gen_range(-16..=16), 4))).collect()
}

/// Symbolic verdicts on `count` games with symbolic constants, checked by
/// running the oracle at sampled assignments: random quarter-grid points
/// plus one solver model per leaf case.
pub fn sampling_run(
    params: &GenParams,
    count: usize,
    samples: usize,
    config: &SolverConfig,
    guard: u64,
) -> Result<SampleReport, DiffError> {
    let mut report = SampleReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for i in 0..count as u64 {
        let seed = params.seed + i;
        let game = random_game(&GenParams { seed, ..params.clone() });
        let constants = game.symbols.names_of(crate::term::SymbolKind::Constant);
        report.games += 1;
        for property in Property::ALL {
            for h in &game.honest_histories {
                let (result, check) = check_instance(&game, h, property, config)?;
                report.closure.record(&check);
                let violated: Vec<Case> = result.violated_cases().into_iter().map(|(c, _)| c.clone()).collect();
                let mut points: Vec<HashMap<String, Rational>> = Vec::new();
                for (case, _) in result.tree.leaves() {
                    if let Some(mut m) = case_model(&game, property, case, config)? {
                        for (k, v) in random_point(&constants, &mut rng) {
                            m.entry(k).or_insert(v);
                        }
                        points.push(m);
                    }
                }
                points.extend((0..samples).map(|_| random_point(&constants, &mut rng)));
                if result.holds {
                    report.yes += 1;
                } else {
                    report.no += 1;
                }
                let mut witnessed = false;
                for env in points {
                    let cg = match ConcreteGame::new(&game, env.clone()) {
                        Ok(cg) => cg,
                        Err(OracleError::AssumptionViolated(_)) => continue,
                        Err(e) => return Err(e.into()),
                    };
                    let inside = if result.holds {
                        None
                    } else {
                        let mut found = None;
                        for c in &violated {
                            if case_contains(c, &game, &env)? {
                                found = Some(c.clone());
                                break;
                            }
                        }
                        match found {
                            Some(c) => Some(c),
                            None => continue,
                        }
                    };
                    let verdict = match oracle_check(&cg, h, property, guard) {
                        Ok(v) => v,
                        Err(OracleError::AssumptionViolated(_)) => continue,
                        Err(e) => return Err(e.into()),
                    };
                    report.points += 1;
                    witnessed |= inside.is_some();
                    if verdict != result.holds {
                        report.violations.push(SampleViolation {
                            seed,
                            property,
                            verdict: result.holds,
                            assignment: env.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                            case: inside,
                        });
                    }
                }
                if !result.holds && !witnessed {
                    report.unwitnessed += 1;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::parse_game;
    use crate::solver::BackendKind;

    #[test]
    fn two_player_closure() {
        let g = parse_game(include_str!("../../games/two_player.json")).unwrap();
        let cfg = SolverConfig::with_backend(BackendKind::Embedded);
        let (_, c) = check_instance(&g, &g.honest_histories[0], Property::WeakImmunity, &cfg).unwrap();
        assert!(c.partition);
        assert_eq!(c.precondition.as_deref(), Some("(and (>= a 2.0) (>= b 0.0))"));
        assert_eq!(c.closure, Some(Closure::Holds));
    }

    #[test]
    fn infinitesimal_atoms() {
        let g = random_game(&GenParams { seed: 3, infinitesimal_probability: 1.0, ..GenParams::default() });
        let env = HashMap::new();
        let eps = Poly::var("eps");
        let tiny = RealAtom::new(Poly::constant(int(1)).sub(&eps.scale(&int(1000))), crate::term::CmpOp::Gt);
        let crate::term::AtomOrConst::Atom(tiny) = tiny else { panic!() };
        assert!(atom_holds(&tiny, &g, &env).unwrap());
    }

    #[test]
    fn small_sampling_run() {
        let cfg = SolverConfig::with_backend(BackendKind::Embedded);
        let p = GenParams { seed: 40, symbolic: 2, max_depth: 3, ..GenParams::default() };
        let r = sampling_run(&p, 8, 6, &cfg, 100_000).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.unwitnessed, 0);
        assert!(r.closure.ok(), "{:?}", r.closure);
    }
}
