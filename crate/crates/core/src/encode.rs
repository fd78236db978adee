//! Per-property formulas over decision variables.
//!
//! A decision variable `dv.N.I` is true when the strategy picks child `I`
//! at internal node `N`. The skeleton makes strategies functions that agree
//! with the honest history; each requirement is an implication from a
//! conjunction of decision variables to a comparison over utilities.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::formula::Formula;
use crate::game::{Game, GameError, History, NodeId, PlayerId, Property};
use crate::term::{compare, utility_arith, ArithOp, CmpOp, RealAtom, UtilityPair};

/// Largest player count for which all coalitions are enumerated.
pub const MAX_COALITION_PLAYERS: usize = 10;

pub fn dv_name(node: NodeId, child: usize) -> String {
    format!("dv.{node}.{child}")
}

pub fn dv(node: NodeId, child: usize) -> Formula {
    Formula::Var(dv_name(node, child))
}

/// What a requirement is about, for counterexamples and diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `player` must not be harmed at `leaf`.
    Harm { leaf: NodeId, player: PlayerId },
    /// `group` must not gain at `leaf` over the honest leaf.
    Gain { leaf: NodeId, group: Vec<PlayerId> },
    /// At `node`, continuing via `chosen` to `leaf` must be no worse for the
    /// mover than switching to `alternative` and reaching `alt_leaf`.
    Deviation { node: NodeId, player: PlayerId, chosen: usize, alternative: usize, leaf: NodeId, alt_leaf: NodeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub label: String,
    /// Decision variables whose conjunction is the premise.
    pub premise: Vec<(NodeId, usize)>,
    pub conclusion: Formula,
    pub provenance: Provenance,
}

impl Requirement {
    pub fn formula(&self) -> Formula {
        Self::implication(&self.premise, self.conclusion.clone())
    }

    pub fn implication(premise: &[(NodeId, usize)], conclusion: Formula) -> Formula {
        Formula::implies(Formula::and(premise.iter().map(|(n, c)| dv(*n, *c))), conclusion)
    }
}

#[derive(Clone, Debug)]
pub struct PropertyFormula {
    pub property: Property,
    pub history: History,
    /// Honest choice per node on the honest path.
    pub honest: HashMap<NodeId, usize>,
    pub skeleton: Vec<Formula>,
    pub requirements: Vec<Requirement>,
}

impl PropertyFormula {
    /// Distinct atoms of all requirements, in document order.
    pub fn atom_universe(&self) -> Vec<RealAtom> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.requirements {
            for a in r.conclusion.atoms() {
                if seen.insert(a.to_smt()) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    pub fn requirement(&self, label: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.label == label)
    }

    /// Whether every premise variable of `r` is fixed true by the honest history.
    pub fn premise_forced(&self, r: &Requirement) -> bool {
        r.premise.iter().all(|(n, c)| self.honest.get(n) == Some(c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{0} players give too many coalitions (at most {MAX_COALITION_PLAYERS} supported)")]
    TooManyPlayers(usize),
}

/// Exactly one decision per internal node, and honest fixing.
pub fn encode_skeleton(game: &Game, h: &History) -> Result<(Vec<Formula>, HashMap<NodeId, usize>), GameError> {
    let honest = game.tree.honest_choices(h)?;
    let mut out = Vec::new();
    for n in game.tree.internal_nodes() {
        let k = game.tree.children(n).len();
        out.push(Formula::or((0..k).map(|c| dv(n, c))));
        for i in 0..k {
            for j in i + 1..k {
                out.push(Formula::or([dv(n, i).not(), dv(n, j).not()]));
            }
        }
    }
    let mut fixed: Vec<_> = honest.iter().map(|(n, c)| (*n, *c)).collect();
    fixed.sort();
    out.extend(fixed.into_iter().map(|(n, c)| dv(n, c)));
    Ok((out, honest))
}

struct Builder {
    requirements: Vec<Requirement>,
}

impl Builder {
    fn push(&mut self, premise: Vec<(NodeId, usize)>, conclusion: Formula, provenance: Provenance) {
        if conclusion.is_true() {
            return;
        }
        let label = format!("req{}", self.requirements.len());
        self.requirements.push(Requirement { label, premise, conclusion, provenance });
    }
}

fn immunity(game: &Game, weaker: bool, b: &mut Builder) {
    let leaves = game.tree.leaves();
    for p in 0..game.players.len() {
        for &z in &leaves {
            let premise: Vec<_> =
                game.tree.path(z).into_iter().filter(|(n, _)| game.tree.player(*n) == Some(p)).collect();
            let u = &game.tree.utilities(z).unwrap()[p];
            let conclusion = if weaker {
                compare(CmpOp::Ge, &UtilityPair::real(u.real.clone()), &UtilityPair::zero())
            } else {
                compare(CmpOp::Ge, u, &UtilityPair::zero())
            };
            b.push(premise, conclusion, Provenance::Harm { leaf: z, player: p });
        }
    }
}

pub(crate) fn group_sum(utilities: &[UtilityPair], group: &[PlayerId]) -> UtilityPair {
    group.iter().fold(UtilityPair::zero(), |acc, p| {
        utility_arith(ArithOp::Add, &acc, &utilities[*p]).expect("addition is total")
    })
}

/// Nonempty proper subsets of players, by bitmask order.
pub fn coalitions(players: usize) -> Vec<Vec<PlayerId>> {
    if players < 2 {
        return Vec::new();
    }
    (1u32..(1 << players) - 1)
        .map(|mask| (0..players).filter(|p| mask & (1 << p) != 0).collect())
        .collect()
}

fn collusion(game: &Game, honest_leaf: NodeId, b: &mut Builder) -> Result<(), EncodeError> {
    let n = game.players.len();
    if n > MAX_COALITION_PLAYERS {
        return Err(EncodeError::TooManyPlayers(n));
    }
    let leaves = game.tree.leaves();
    let honest_u = game.tree.utilities(honest_leaf).unwrap();
    for group in coalitions(n) {
        let honest_sum = group_sum(honest_u, &group);
        for &z in &leaves {
            let premise: Vec<_> = game
                .tree
                .path(z)
                .into_iter()
                .filter(|(node, _)| !group.contains(&game.tree.player(*node).unwrap()))
                .collect();
            let sum = group_sum(game.tree.utilities(z).unwrap(), &group);
            b.push(premise, compare(CmpOp::Le, &sum, &honest_sum), Provenance::Gain { leaf: z, group: group.clone() });
        }
    }
    Ok(())
}

fn practicality(game: &Game, b: &mut Builder) {
    let tree = &game.tree;
    for n in tree.internal_nodes() {
        let p = tree.player(n).unwrap();
        let children = tree.children(n);
        let leaf_paths: Vec<Vec<(NodeId, Vec<(NodeId, usize)>)>> = children
            .iter()
            .map(|e| tree.leaves_under(e.child).into_iter().map(|z| (z, tree.path_between(e.child, z))).collect())
            .collect();
        for (alt, _) in children.iter().enumerate() {
            for (chosen, _) in children.iter().enumerate() {
                if chosen == alt {
                    continue;
                }
                for (z, path) in &leaf_paths[chosen] {
                    for (z_alt, alt_path) in &leaf_paths[alt] {
                        let mut premise = vec![(n, chosen)];
                        premise.extend(path.iter().copied());
                        premise.extend(alt_path.iter().copied());
                        let u = &tree.utilities(*z).unwrap()[p];
                        let v = &tree.utilities(*z_alt).unwrap()[p];
                        b.push(
                            premise,
                            compare(CmpOp::Ge, u, v),
                            Provenance::Deviation { node: n, player: p, chosen, alternative: alt, leaf: *z, alt_leaf: *z_alt },
                        );
                    }
                }
            }
        }
    }
}

/// The formula whose satisfiability, case by case, decides `property` for `h`.
pub fn encode(game: &Game, h: &History, property: Property) -> Result<PropertyFormula, EncodeError> {
    let (skeleton, honest) = encode_skeleton(game, h)?;
    let honest_leaf = game.resolve(h)?;
    let mut b = Builder { requirements: Vec::new() };
    match property {
        Property::WeakImmunity => immunity(game, false, &mut b),
        Property::WeakerImmunity => immunity(game, true, &mut b),
        Property::CollusionResilience => collusion(game, honest_leaf, &mut b)?,
        Property::Practicality => practicality(game, &mut b),
    }
    Ok(PropertyFormula { property, history: h.clone(), honest, skeleton, requirements: b.requirements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::parse_game;

    fn two_player() -> Game {
        parse_game(include_str!("../games/two_player.json")).unwrap()
    }

    #[test]
    fn skeleton_of_two_player() {
        let g = two_player();
        let (sk, honest) = encode_skeleton(&g, &g.honest_histories[0]).unwrap();
        let text: Vec<String> = sk.iter().map(|f| f.to_smt()).collect();
        assert_eq!(
            text,
            [
                "(or dv.0.0 dv.0.1)",
                "(or (not dv.0.0) (not dv.0.1))",
                "(or dv.2.0 dv.2.1)",
                "(or (not dv.2.0) (not dv.2.1))",
                "dv.0.1",
                "dv.2.0"
            ]
        );
        assert_eq!(honest.len(), 2);
    }

    #[test]
    fn single_leaf_skeleton_is_empty() {
        let doc = r#"{"players":["A"],"actions":[],"infinitesimals":[],"constants":[],"initial_constraints":[],
            "property_constraints":{"weak_immunity":[],"weaker_immunity":[],"collusion_resilience":[],"practicality":[]},
            "honest_histories":[[]],"tree":{"utility":[{"player":"A","value":"0"}]}}"#;
        let g = parse_game(doc).unwrap();
        let (sk, _) = encode_skeleton(&g, &g.honest_histories[0]).unwrap();
        assert!(sk.is_empty());
        for p in Property::ALL {
            assert!(encode(&g, &g.honest_histories[0], p).unwrap().requirements.is_empty());
        }
    }

    #[test]
    fn weak_immunity_of_two_player() {
        let g = two_player();
        let f = encode(&g, &g.honest_histories[0], Property::WeakImmunity).unwrap();
        let text: Vec<String> = f.requirements.iter().map(|r| r.formula().to_smt()).collect();
        assert_eq!(
            text,
            [
                "(or (not dv.0.0) (>= (- a 1.0) 0.0))",
                "(or (not dv.0.1) (>= (- a 2.0) 0.0))",
                "(or (not dv.0.1) (>= b 0.0))",
                "(>= a 0.0)",
                "(or (not dv.2.0) (>= b 0.0))",
                "(or (not dv.2.1) (>= a 0.0))",
            ]
        );
        assert!(f.premise_forced(&f.requirements[1]));
        assert!(!f.premise_forced(&f.requirements[0]));
        assert_eq!(f.atom_universe().len(), 4);
    }

    #[test]
    fn collusion_of_two_player() {
        let g = two_player();
        let f = encode(&g, &g.honest_histories[0], Property::CollusionResilience).unwrap();
        let first = &f.requirements[0];
        assert!(first.premise.is_empty());
        assert_eq!(first.provenance, Provenance::Gain { leaf: 1, group: vec![0] });
        assert!(first.conclusion.is_false());
        assert_eq!(coalitions(1).len(), 0);
        assert_eq!(coalitions(3).len(), 6);
    }

    #[test]
    fn practicality_of_two_player() {
        let g = two_player();
        let f = encode(&g, &g.honest_histories[0], Property::Practicality).unwrap();
        let root_reqs: Vec<_> = f
            .requirements
            .iter()
            .filter(|r| matches!(r.provenance, Provenance::Deviation { node: 0, chosen: 1, .. }))
            .collect();
        assert_eq!(root_reqs.len(), 2);
        assert!(root_reqs[0].conclusion.is_false());
        assert_eq!(root_reqs[1].conclusion.to_smt(), "(<= (- (- a b) 1.0) 0.0)");
    }
}
