//! Analysis of one game for the selected histories and properties.

use std::io::Write;

use checkmate_core::analysis::{
    all_counterexamples, counterexample, extract_strategy, verify_precondition, weakest_precondition, AnalysisError,
};
use checkmate_core::engine::{Analyzer, Case, EngineError, EngineOptions};
use checkmate_core::game::{Game, History, Property};
use checkmate_core::solver::SolverConfig;

use crate::options::RunOptions;
use crate::report::{render_header, render_property, PreconditionReport, PropertyReport, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The input itself is unusable.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
}

impl From<EngineError> for RunError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Game(_) | EngineError::Encode(_) | EngineError::InconsistentAssumptions(_) => {
                RunError::Input(e.to_string())
            }
            other => RunError::Analysis(other.into()),
        }
    }
}

fn analyze(game: &Game, h: &History, property: Property, opts: &RunOptions, config: &SolverConfig) -> Result<PropertyReport, RunError> {
    let mut an = Analyzer::new(game, h, property, config)?;
    let result = an.run(EngineOptions { explore_all: opts.explore_all() })?;
    let mut report = PropertyReport::from_result(&result);
    report.partition_verified = an.verify_partition(&result.tree)?;
    if result.holds {
        if opts.strategies {
            for (case, model) in result.satisfied_cases() {
                report.strategies.push(extract_strategy(game, case, model)?);
            }
        }
        return Ok(report);
    }
    let violated: Vec<Case> = result.violated_cases().into_iter().map(|(c, _)| c.clone()).collect();
    if opts.counterexamples {
        for case in &violated {
            if opts.all_counterexamples {
                report.counterexamples.extend(all_counterexamples(&mut an, case)?);
            } else {
                report.counterexamples.push(counterexample(&mut an, case)?);
            }
        }
    }
    if opts.preconditions {
        let wp = weakest_precondition(&mut an.ctx, &violated)?;
        let verified = verify_precondition(&mut an.ctx, &wp, &violated)?;
        if !verified {
            return Err(AnalysisError::PreconditionMismatch.into());
        }
        report.precondition = Some(PreconditionReport { formula: wp.to_smt(), verified });
    }
    Ok(report)
}

/// Runs every selected property for every honest history, streaming the
/// text report to `out`.
pub fn run_game(
    game: &Game,
    opts: &RunOptions,
    config: &SolverConfig,
    out: &mut dyn Write,
) -> Result<Vec<PropertyReport>, RunError> {
    let mut reports = Vec::new();
    for &property in &opts.properties {
        let _ = write!(out, "{}", render_header(property));
        for h in &game.honest_histories {
            let report = match analyze(game, h, property, opts, config) {
                Ok(r) => r,
                Err(RunError::Analysis(e)) => PropertyReport::unknown(property, h.clone(), e.to_string()),
                Err(e) => return Err(e),
            };
            let _ = writeln!(out, "{}", render_property(&report));
            let _ = out.flush();
            reports.push(report);
        }
    }
    Ok(reports)
}

/// 0 when everything holds, 1 on a violation, 3 when something is undecided.
pub fn exit_code(reports: &[PropertyReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Unknown) {
        3
    } else if reports.iter().any(|r| r.verdict == Verdict::No) {
        1
    } else {
        0
    }
}
