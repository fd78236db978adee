//! JSON input format: schema check, then semantic validation into a [`Game`].

use std::collections::HashSet;
use std::sync::OnceLock;

use jsonschema::JSONSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Edge, Game, GameError, History, Node, NodeKind, Property, Tree};
use crate::term::{parse_constraint, parse_term, to_utility, Expr, SymbolKind, SymbolTable};

/// The machine-readable input schema.
pub const INPUT_SCHEMA: &str = include_str!("../../schema/input.schema.json");

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    players: Vec<String>,
    actions: Vec<String>,
    infinitesimals: Vec<String>,
    constants: Vec<String>,
    initial_constraints: Vec<String>,
    property_constraints: RawPropertyConstraints,
    honest_histories: Vec<Vec<String>>,
    tree: RawNode,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropertyConstraints {
    weak_immunity: Vec<String>,
    weaker_immunity: Vec<String>,
    collusion_resilience: Vec<String>,
    practicality: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawNode {
    Branch { player: String, children: Vec<RawEdge> },
    Leaf { utility: Vec<RawUtility> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    action: String,
    child: RawNode,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUtility {
    player: String,
    value: String,
}

fn schema() -> &'static JSONSchema {
    static SCHEMA: OnceLock<JSONSchema> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let value: Value = serde_json::from_str(INPUT_SCHEMA).expect("bundled schema is JSON");
        JSONSchema::compile(&value).expect("bundled schema compiles")
    })
}

/// Parses and validates a game document.
pub fn parse_game(document: &str) -> Result<Game, GameError> {
    let value: Value = serde_json::from_str(document).map_err(|e| GameError::Json(e.to_string()))?;
    if let Err(mut errors) = schema().validate(&value) {
        let e = errors.next().expect("at least one schema error");
        let path = e.instance_path.to_string();
        return Err(GameError::invalid(if path.is_empty() { "/".into() } else { path }, e.to_string()));
    }
    let raw: RawGame = serde_json::from_value(value).map_err(|e| GameError::invalid("/", e.to_string()))?;
    build(raw)
}

fn build(raw: RawGame) -> Result<Game, GameError> {
    let mut symbols = SymbolTable::new();
    for (key, kind, names) in [
        ("constants", SymbolKind::Constant, &raw.constants),
        ("infinitesimals", SymbolKind::Infinitesimal, &raw.infinitesimals),
    ] {
        for (i, name) in names.iter().enumerate() {
            symbols
                .declare(name, kind)
                .map_err(|e| GameError::invalid(format!("/{key}/{i}"), e.to_string()))?;
        }
    }

    let constraints = |path: &str, texts: &[String]| -> Result<Vec<Expr>, GameError> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let e = parse_constraint(t, &symbols).map_err(|e| GameError::invalid(format!("{path}/{i}"), e.to_string()))?;
                crate::term::constraint_to_formula(&e, &symbols)
                    .map_err(|err| GameError::invalid(format!("{path}/{i}"), err.to_string()))?;
                Ok(e)
            })
            .collect()
    };
    let initial_constraints = constraints("/initial_constraints", &raw.initial_constraints)?;
    let pc = &raw.property_constraints;
    let property_constraints = [
        constraints("/property_constraints/weak_immunity", &pc.weak_immunity)?,
        constraints("/property_constraints/weaker_immunity", &pc.weaker_immunity)?,
        constraints("/property_constraints/collusion_resilience", &pc.collusion_resilience)?,
        constraints("/property_constraints/practicality", &pc.practicality)?,
    ];

    let mut builder = TreeBuilder { players: &raw.players, actions: raw.actions.iter().collect(), symbols: &symbols, nodes: Vec::new() };
    builder.node(&raw.tree, None, "/tree".to_string())?;
    let tree = Tree::from_nodes(builder.nodes);

    let mut honest_histories = Vec::new();
    for (i, actions) in raw.honest_histories.iter().enumerate() {
        let h = History(actions.clone());
        let path = format!("/honest_histories/{i}");
        let node = tree.resolve(&h).map_err(|e| GameError::invalid(&path, e.to_string()))?;
        if !tree.is_leaf(node) {
            return Err(GameError::invalid(path, format!("honest history {h} must reach a leaf")));
        }
        honest_histories.push(h);
    }

    Ok(Game::new(
        raw.players,
        raw.actions,
        symbols,
        initial_constraints,
        property_constraints,
        honest_histories,
        tree,
    ))
}

struct TreeBuilder<'a> {
    players: &'a [String],
    actions: HashSet<&'a String>,
    symbols: &'a SymbolTable,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn node(&mut self, raw: &RawNode, parent: Option<(usize, usize)>, path: String) -> Result<usize, GameError> {
        let id = self.nodes.len();
        match raw {
            RawNode::Branch { player, children } => {
                let p = self
                    .players
                    .iter()
                    .position(|x| x == player)
                    .ok_or_else(|| GameError::invalid(format!("{path}/player"), format!("undeclared player `{player}`")))?;
                self.nodes.push(Node { kind: NodeKind::Branch { player: p, children: Vec::new() }, parent });
                let mut edges = Vec::with_capacity(children.len());
                let mut seen = HashSet::new();
                for (i, edge) in children.iter().enumerate() {
                    let epath = format!("{path}/children/{i}");
                    if !self.actions.contains(&edge.action) {
                        return Err(GameError::invalid(format!("{epath}/action"), format!("undeclared action `{}`", edge.action)));
                    }
                    if !seen.insert(&edge.action) {
                        return Err(GameError::invalid(format!("{epath}/action"), format!("duplicate sibling action `{}`", edge.action)));
                    }
                    let child = self.node(&edge.child, Some((id, i)), format!("{epath}/child"))?;
                    edges.push(Edge { action: edge.action.clone(), child });
                }
                if let NodeKind::Branch { children, .. } = &mut self.nodes[id].kind {
                    *children = edges;
                }
            }
            RawNode::Leaf { utility } => {
                let mut values: Vec<Option<Expr>> = vec![None; self.players.len()];
                for (i, u) in utility.iter().enumerate() {
                    let upath = format!("{path}/utility/{i}");
                    let p = self
                        .players
                        .iter()
                        .position(|x| x == &u.player)
                        .ok_or_else(|| GameError::invalid(format!("{upath}/player"), format!("undeclared player `{}`", u.player)))?;
                    if values[p].is_some() {
                        return Err(GameError::invalid(format!("{upath}/player"), format!("duplicate utility for player `{}`", u.player)));
                    }
                    let e = parse_term(&u.value, self.symbols).map_err(|e| GameError::invalid(format!("{upath}/value"), e.to_string()))?;
                    values[p] = Some(e);
                }
                let mut exprs = Vec::with_capacity(values.len());
                let mut utilities = Vec::with_capacity(values.len());
                for (p, v) in values.into_iter().enumerate() {
                    let e = v.ok_or_else(|| {
                        GameError::invalid(format!("{path}/utility"), format!("utility missing for player `{}`", self.players[p]))
                    })?;
                    let u = to_utility(&e, self.symbols).map_err(|err| GameError::invalid(format!("{path}/utility"), err.to_string()))?;
                    exprs.push(e);
                    utilities.push(u);
                }
                self.nodes.push(Node { kind: NodeKind::Leaf { values: exprs, utilities }, parent });
            }
        }
        Ok(id)
    }
}

fn raw_of(game: &Game) -> RawGame {
    let texts = |es: &[Expr]| es.iter().map(|e| e.to_string()).collect::<Vec<_>>();
    fn node(game: &Game, id: usize) -> RawNode {
        match &game.tree.node(id).kind {
            NodeKind::Branch { player, children } => RawNode::Branch {
                player: game.players[*player].clone(),
                children: children.iter().map(|e| RawEdge { action: e.action.clone(), child: node(game, e.child) }).collect(),
            },
            NodeKind::Leaf { values, .. } => RawNode::Leaf {
                utility: values
                    .iter()
                    .enumerate()
                    .map(|(p, v)| RawUtility { player: game.players[p].clone(), value: v.to_string() })
                    .collect(),
            },
        }
    }
    RawGame {
        players: game.players.clone(),
        actions: game.actions.clone(),
        infinitesimals: game.symbols.names_of(SymbolKind::Infinitesimal),
        constants: game.symbols.names_of(SymbolKind::Constant),
        initial_constraints: texts(&game.initial_constraints),
        property_constraints: RawPropertyConstraints {
            weak_immunity: texts(game.property_constraints(Property::WeakImmunity)),
            weaker_immunity: texts(game.property_constraints(Property::WeakerImmunity)),
            collusion_resilience: texts(game.property_constraints(Property::CollusionResilience)),
            practicality: texts(game.property_constraints(Property::Practicality)),
        },
        honest_histories: game.honest_histories.iter().map(|h| h.0.clone()).collect(),
        tree: node(game, Tree::ROOT),
    }
}

/// Compact, schema-conformant JSON for `game`.
pub fn serialize_game(game: &Game) -> String {
    serde_json::to_string(&raw_of(game)).expect("game serializes")
}

pub fn serialize_game_pretty(game: &Game) -> String {
    serde_json::to_string_pretty(&raw_of(game)).expect("game serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PLAYER: &str = include_str!("../../games/two_player.json");

    fn edit(f: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(TWO_PLAYER).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn message(doc: &str) -> String {
        parse_game(doc).unwrap_err().to_string()
    }

    #[test]
    fn round_trip() {
        let g = parse_game(TWO_PLAYER).unwrap();
        let again = parse_game(&serialize_game(&g)).unwrap();
        assert_eq!(g, again);
        assert_eq!(parse_game(&serialize_game_pretty(&g)).unwrap(), g);
    }

    #[test]
    fn missing_utility() {
        let doc = edit(|v| {
            v["tree"]["children"][0]["child"]["utility"].as_array_mut().unwrap().pop();
        });
        let m = message(&doc);
        assert!(m.contains("utility missing for player `B`"), "{m}");
        assert!(m.starts_with("/tree/children/0/child/utility"), "{m}");
    }

    #[test]
    fn honest_history_must_reach_leaf() {
        let doc = edit(|v| v["honest_histories"] = serde_json::json!([["r_A"]]));
        assert!(message(&doc).contains("honest history [r_A] must reach a leaf"));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let doc = edit(|v| {
            v.as_object_mut().unwrap().remove("actions");
        });
        assert!(message(&doc).contains("actions"));
        let doc = edit(|v| v["extra"] = serde_json::json!(1));
        assert!(parse_game(&doc).is_err());
        let doc = edit(|v| v["property_constraints"].as_object_mut().unwrap().remove("practicality").map(|_| ()).unwrap());
        assert!(message(&doc).contains("practicality"));
        assert!(matches!(parse_game("{"), Err(GameError::Json(_))));
    }

    #[test]
    fn semantic_errors() {
        let doc = edit(|v| v["tree"]["children"][1]["action"] = "l_A".into());
        assert!(message(&doc).contains("duplicate sibling action"));
        let doc = edit(|v| v["tree"]["player"] = "C".into());
        assert!(message(&doc).contains("undeclared player"));
        let doc = edit(|v| v["tree"]["children"][1]["action"] = "x".into());
        assert!(message(&doc).contains("undeclared action"));
        let doc = edit(|v| v["initial_constraints"] = serde_json::json!(["c > 0"]));
        assert!(message(&doc).starts_with("/initial_constraints/0"));
        let doc = edit(|v| v["infinitesimals"] = serde_json::json!(["a"]));
        assert!(message(&doc).contains("declared twice"));
        let doc = edit(|v| v["initial_constraints"] = serde_json::json!(["a"]));
        assert!(parse_game(&doc).is_err());
        let doc = edit(|v| {
            v["infinitesimals"] = serde_json::json!(["e"]);
            v["tree"]["children"][0]["child"]["utility"][0]["value"] = "e*e".into();
        });
        assert!(message(&doc).contains("infinitesimal"));
    }
}
