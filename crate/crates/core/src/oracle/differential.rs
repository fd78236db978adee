//! Symbolic verdicts compared against the oracle on generated games.

use std::collections::HashMap;

use serde::Serialize;

use super::{oracle_check, random_game, ConcreteGame, GenParams, OracleError};
use crate::engine::{check_property, EngineError, EngineOptions};
use crate::game::{serialize_game, Property};
use crate::solver::SolverConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub seed: u64,
    pub property: Property,
    pub symbolic: bool,
    pub oracle: bool,
    /// The game in input format, to reproduce the failure.
    pub game: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DiffReport {
    pub games: usize,
    /// Seeds skipped because enumeration would exceed the guard.
    pub skipped: usize,
    pub checks: usize,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, thiserror::Error)]
pub enum DiffError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
}

/// Runs `count` concrete games starting at `params.seed`.
pub fn differential_run(params: &GenParams, count: usize, config: &SolverConfig, guard: u64) -> Result<DiffReport, DiffError> {
    let mut report = DiffReport::default();
    let mut seed = params.seed;
    while report.games < count {
        let p = GenParams { seed, symbolic: 0, ..params.clone() };
        seed += 1;
        let game = random_game(&p);
        let cg = ConcreteGame::new(&game, HashMap::new())?;
        let h = game.honest_histories[0].clone();
        let mut oracle = Vec::new();
        let mut skip = false;
        for property in Property::ALL {
            match oracle_check(&cg, &h, property, guard) {
                Ok(v) => oracle.push(v),
                Err(OracleError::GuardExceeded(_)) => {
                    skip = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if skip {
            report.skipped += 1;
            continue;
        }
        for (property, expected) in Property::ALL.into_iter().zip(oracle) {
            let r = check_property(&game, &h, property, config, EngineOptions::default())?;
            report.checks += 1;
            if r.holds != expected {
                report.mismatches.push(Mismatch {
                    seed: p.seed,
                    property,
                    symbolic: r.holds,
                    oracle: expected,
                    game: serialize_game(&game),
                });
            }
        }
        report.games += 1;
    }
    Ok(report)
}
