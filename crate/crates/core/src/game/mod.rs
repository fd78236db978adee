//! Extensive-form games: players, symbols, assumptions, honest histories and
//! the game tree.
//!
//! The tree is stored as an arena with the root at index 0. Children keep
//! their document order, which every deterministic choice downstream relies on.

mod json;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::term::{constraint_to_formula, Expr, SymbolTable, UtilityPair};

pub use json::{parse_game, serialize_game, serialize_game_pretty, INPUT_SCHEMA};

pub type NodeId = usize;
pub type PlayerId = usize;

/// The four security properties, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    WeakImmunity,
    WeakerImmunity,
    CollusionResilience,
    Practicality,
}

impl Property {
    pub const ALL: [Property; 4] = [
        Property::WeakImmunity,
        Property::WeakerImmunity,
        Property::CollusionResilience,
        Property::Practicality,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Property::WeakImmunity => "weak_immunity",
            Property::WeakerImmunity => "weaker_immunity",
            Property::CollusionResilience => "collusion_resilience",
            Property::Practicality => "practicality",
        }
    }

    pub fn from_key(key: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.key() == key)
    }

    pub fn header(self) -> &'static str {
        match self {
            Property::WeakImmunity => "WEAK IMMUNITY",
            Property::WeakerImmunity => "WEAKER IMMUNITY",
            Property::CollusionResilience => "COLLUSION RESILIENCE",
            Property::Practicality => "PRACTICALITY",
        }
    }

    pub fn adjective(self) -> &'static str {
        match self {
            Property::WeakImmunity => "weak immune",
            Property::WeakerImmunity => "weaker immune",
            Property::CollusionResilience => "collusion resilient",
            Property::Practicality => "practical",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A sequence of actions from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct History(pub Vec<String>);

impl History {
    pub fn new<S: Into<String>>(actions: impl IntoIterator<Item = S>) -> Self {
        History(actions.into_iter().map(Into::into).collect())
    }

    pub fn actions(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub action: String,
    pub child: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Branch { player: PlayerId, children: Vec<Edge> },
    /// Utilities indexed by player, both as written and as pairs.
    Leaf { values: Vec<Expr>, utilities: Vec<UtilityPair> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Parent node and the index of this node among its children.
    pub parent: Option<(NodeId, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("history {history} is not playable: {message}")]
    BadHistory { history: History, message: String },
}

impl GameError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        GameError::Invalid { path: path.into(), message: message.into() }
    }
}

impl Tree {
    pub const ROOT: NodeId = 0;

    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Self {
        Tree { nodes }
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Leaf { .. })
    }

    pub fn children(&self, id: NodeId) -> &[Edge] {
        match &self.nodes[id].kind {
            NodeKind::Branch { children, .. } => children,
            NodeKind::Leaf { .. } => &[],
        }
    }

    pub fn player(&self, id: NodeId) -> Option<PlayerId> {
        match &self.nodes[id].kind {
            NodeKind::Branch { player, .. } => Some(*player),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn utilities(&self, id: NodeId) -> Option<&[UtilityPair]> {
        match &self.nodes[id].kind {
            NodeKind::Leaf { utilities, .. } => Some(utilities),
            NodeKind::Branch { .. } => None,
        }
    }

    /// All nodes in depth-first preorder (document order).
    pub fn preorder(&self) -> Vec<NodeId> {
        self.preorder_from(Tree::ROOT)
    }

    pub fn preorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev().map(|e| e.child));
        }
        out
    }

    pub fn leaves_under(&self, start: NodeId) -> Vec<NodeId> {
        self.preorder_from(start).into_iter().filter(|&n| self.is_leaf(n)).collect()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.leaves_under(Tree::ROOT)
    }

    pub fn internal_nodes(&self) -> Vec<NodeId> {
        self.preorder().into_iter().filter(|&n| !self.is_leaf(n)).collect()
    }

    /// Edges `(node, child index)` from `ancestor` down to `node`, top first.
    pub fn path_between(&self, ancestor: NodeId, node: NodeId) -> Vec<(NodeId, usize)> {
        let mut out = Vec::new();
        let mut cur = node;
        while cur != ancestor {
            let (p, i) = self.nodes[cur].parent.expect("ancestor lies above node");
            out.push((p, i));
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn path(&self, node: NodeId) -> Vec<(NodeId, usize)> {
        self.path_between(Tree::ROOT, node)
    }

    pub fn history_of(&self, node: NodeId) -> History {
        History(
            self.path(node)
                .into_iter()
                .map(|(p, i)| self.children(p)[i].action.clone())
                .collect(),
        )
    }

    /// Follows `h` from the root.
    pub fn resolve(&self, h: &History) -> Result<NodeId, GameError> {
        let mut cur = Tree::ROOT;
        for (step, action) in h.actions().iter().enumerate() {
            match self.children(cur).iter().find(|e| &e.action == action) {
                Some(e) => cur = e.child,
                None => {
                    return Err(GameError::BadHistory {
                        history: h.clone(),
                        message: format!("action `{action}` is not available at step {step}"),
                    })
                }
            }
        }
        Ok(cur)
    }

    /// Honest choice per node on the path of `h`, as a child index.
    pub fn honest_choices(&self, h: &History) -> Result<HashMap<NodeId, usize>, GameError> {
        let leaf = self.resolve(h)?;
        Ok(self.path(leaf).into_iter().collect())
    }
}

/// A fully validated game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    pub players: Vec<String>,
    pub actions: Vec<String>,
    pub symbols: SymbolTable,
    pub initial_constraints: Vec<Expr>,
    property_constraints: [Vec<Expr>; 4],
    pub honest_histories: Vec<History>,
    pub tree: Tree,
}

/// Size statistics of a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GameStats {
    pub nodes: usize,
    pub players: usize,
    pub histories: usize,
}

impl Game {
    pub fn new(
        players: Vec<String>,
        actions: Vec<String>,
        symbols: SymbolTable,
        initial_constraints: Vec<Expr>,
        property_constraints: [Vec<Expr>; 4],
        honest_histories: Vec<History>,
        tree: Tree,
    ) -> Self {
        Game { players, actions, symbols, initial_constraints, property_constraints, honest_histories, tree }
    }

    pub fn property_constraints(&self, p: Property) -> &[Expr] {
        &self.property_constraints[p.index()]
    }

    pub fn player_index(&self, name: &str) -> Option<PlayerId> {
        self.players.iter().position(|p| p == name)
    }

    pub fn stats(&self) -> GameStats {
        GameStats { nodes: self.tree.len(), players: self.players.len(), histories: self.honest_histories.len() }
    }

    pub fn resolve(&self, h: &History) -> Result<NodeId, GameError> {
        self.tree.resolve(h)
    }

    /// Utilities at the leaf reached by `h`, keyed by player name.
    pub fn honest_leaf_utilities(&self, h: &History) -> Result<Vec<(String, UtilityPair)>, GameError> {
        let leaf = self.resolve(h)?;
        let utilities = self.tree.utilities(leaf).ok_or_else(|| GameError::BadHistory {
            history: h.clone(),
            message: "honest history must reach a leaf".into(),
        })?;
        Ok(self.players.iter().cloned().zip(utilities.iter().cloned()).collect())
    }

    /// Initial and property constraints as one formula.
    pub fn assumptions(&self, p: Property) -> Formula {
        let all = self.initial_constraints.iter().chain(self.property_constraints(p));
        Formula::and(all.map(|c| constraint_to_formula(c, &self.symbols).expect("validated constraint")))
    }

    /// The same game with extra initial constraints appended.
    pub fn with_initial_constraints(&self, extra: impl IntoIterator<Item = Expr>) -> Game {
        let mut g = self.clone();
        g.initial_constraints.extend(extra);
        g
    }

    /// The same game with the given honest histories.
    pub fn with_honest_histories(&self, histories: Vec<History>) -> Game {
        let mut g = self.clone();
        g.honest_histories = histories;
        g
    }
}
