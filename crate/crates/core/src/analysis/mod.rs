//! Artifacts derived from a finished case analysis: witness strategies,
//! counterexamples and weakest preconditions.

pub mod counterexample;
pub mod precondition;
pub mod strategy;

pub use counterexample::{all_counterexamples, counterexample, Counterexample, CounterexampleKind};
pub use precondition::{verify_precondition, weakest_precondition, Precondition};
pub use strategy::{extract_strategy, Choice, Strategy};

use crate::engine::EngineError;
use crate::game::NodeId;
use crate::solver::SolverError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("model assigns no action at node {0}")]
    MissingDecision(NodeId),
    #[error("no counterexample exists in case {0}")]
    NotFound(String),
    #[error("weakest precondition does not match the violating cases")]
    PreconditionMismatch,
}

impl From<SolverError> for AnalysisError {
    fn from(e: SolverError) -> Self {
        AnalysisError::Engine(e.into())
    }
}
