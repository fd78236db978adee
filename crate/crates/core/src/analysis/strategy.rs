//! Strategies read off decision variables of a satisfying model.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::AnalysisError;
use crate::encode::dv_name;
use crate::engine::Case;
use crate::game::{Game, History, NodeId};
use crate::solver::Model;

/// One action assigned at an internal node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Choice {
    #[serde(skip)]
    pub node: NodeId,
    #[serde(skip)]
    pub child: usize,
    pub history: History,
    pub player: String,
    pub action: String,
}

impl Choice {
    pub fn new(game: &Game, node: NodeId, child: usize) -> Choice {
        Choice {
            node,
            child,
            history: game.tree.history_of(node),
            player: game.players[game.tree.player(node).expect("internal node")].clone(),
            action: game.tree.children(node)[child].action.clone(),
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.history, self.action)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub case: Case,
    /// One choice per internal node, in preorder.
    pub choices: Vec<Choice>,
}

impl Strategy {
    pub fn choice_map(&self) -> HashMap<NodeId, usize> {
        self.choices.iter().map(|c| (c.node, c.child)).collect()
    }
}

pub fn extract_strategy(game: &Game, case: &Case, model: &Model) -> Result<Strategy, AnalysisError> {
    let mut choices = Vec::new();
    for n in game.tree.internal_nodes() {
        let k = game.tree.children(n).len();
        let c = (0..k)
            .find(|c| model.bool(&dv_name(n, *c)) == Some(true))
            .ok_or(AnalysisError::MissingDecision(n))?;
        choices.push(Choice::new(game, n, c));
    }
    Ok(Strategy { case: case.clone(), choices })
}
