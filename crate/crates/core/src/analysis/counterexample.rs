//! Counterexamples for irreducible violated cases.
//!
//! Comparisons are decided by entailment under the case, and only entailed
//! comparisons count as evidence, so a counterexample holds throughout its
//! case. When none is found that way, the case is refined by the first
//! undetermined atom met and the search restarts; any refinement of a
//! violated case is violated too.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use super::{AnalysisError, Choice};
use crate::encode::{coalitions, group_sum};
use crate::engine::{Analyzer, Case, EngineError};
use crate::formula::{Formula, Truth};
use crate::game::{Game, History, NodeId, PlayerId, Property};
use crate::solver::Entailment;
use crate::term::{compare, CmpOp, RealAtom, UtilityPair};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// `player` is harmed whatever it does, given the attack.
    Harm { player: String, attack: Vec<Choice> },
    /// `group` profits by the attack whatever the others do.
    Profit { group: Vec<String>, attack: Vec<Choice> },
    /// Every strategy is beaten by some group, but no group wins alone.
    Conflict { groups: Vec<Vec<String>> },
    /// `player` gains by leaving the honest history after `honest_prefix`.
    Deviation { player: String, honest_prefix: History, subhistory: History },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub case: Case,
    #[serde(flatten)]
    pub kind: CounterexampleKind,
}

impl fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CounterexampleKind::Harm { player, attack } => {
                write!(f, "Player {player} can be harmed if:")?;
                for c in attack {
                    write!(f, "\nPlayer {} takes action {} after history {}", c.player, c.action, c.history)?;
                }
                Ok(())
            }
            CounterexampleKind::Profit { group, attack } => {
                write!(f, "Group [{}] can profit if:", group.join(", "))?;
                for c in attack {
                    write!(f, "\nPlayer {} takes action {} after history {}", c.player, c.action, c.history)?;
                }
                Ok(())
            }
            CounterexampleKind::Conflict { groups } => {
                write!(f, "Every strategy lets one of these groups profit:")?;
                for g in groups {
                    write!(f, "\n[{}]", g.join(", "))?;
                }
                Ok(())
            }
            CounterexampleKind::Deviation { player, honest_prefix, subhistory } => write!(
                f,
                "Player {player} can profit by deviating from the honest history after {honest_prefix} to the rational subhistory {subhistory}"
            ),
        }
    }
}

type Attack = BTreeMap<NodeId, usize>;

struct Search<'a, 'g> {
    an: &'a mut Analyzer<'g>,
    first: bool,
    /// First undetermined atom that influenced the search.
    pending: Option<RealAtom>,
}

impl Search<'_, '_> {
    fn game(&self) -> &Game {
        self.an.game
    }

    fn decide(&mut self, f: &Formula) -> Result<Truth, AnalysisError> {
        let t = self.an.ctx.truth(f)?;
        if t == Truth::Unknown && self.pending.is_none() {
            for a in f.atoms() {
                if self.an.ctx.entail(a)? == Entailment::Undetermined {
                    self.pending = Some(a.clone());
                    break;
                }
            }
        }
        Ok(t)
    }

    /// Attacks by the free side that make every completion by the bound side
    /// bad. `free` says who owns a node; bound nodes on the honest path
    /// follow the honest history.
    fn attacks(
        &mut self,
        n: NodeId,
        free: &dyn Fn(PlayerId) -> bool,
        bad: &mut dyn FnMut(&mut Self, NodeId) -> Result<bool, AnalysisError>,
    ) -> Result<Vec<Attack>, AnalysisError> {
        if self.game().tree.is_leaf(n) {
            return Ok(if bad(self, n)? { vec![Attack::new()] } else { Vec::new() });
        }
        let owner = self.game().tree.player(n).unwrap();
        let children: Vec<NodeId> = self.game().tree.children(n).iter().map(|e| e.child).collect();
        if free(owner) {
            let mut out = Vec::new();
            for (c, child) in children.into_iter().enumerate() {
                for mut a in self.attacks(child, free, bad)? {
                    a.insert(n, c);
                    out.push(a);
                    if self.first {
                        return Ok(out);
                    }
                }
            }
            return Ok(out);
        }
        if let Some(&c) = self.an.formula.honest.get(&n) {
            return self.attacks(children[c], free, bad);
        }
        let mut acc = vec![Attack::new()];
        for child in children {
            let sub = self.attacks(child, free, bad)?;
            let mut next = Vec::new();
            for a in &acc {
                for b in &sub {
                    let mut m = a.clone();
                    m.extend(b.iter().map(|(k, v)| (*k, *v)));
                    if !next.contains(&m) {
                        next.push(m);
                    }
                }
            }
            acc = next;
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    fn choices(&self, attack: &Attack) -> Vec<Choice> {
        let order: HashMap<NodeId, usize> =
            self.game().tree.preorder().into_iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut out: Vec<Choice> = attack.iter().map(|(n, c)| Choice::new(self.game(), *n, *c)).collect();
        out.sort_by_key(|c| order[&c.node]);
        out
    }

    fn harm(&mut self, weaker: bool) -> Result<Vec<CounterexampleKind>, AnalysisError> {
        let mut out = Vec::new();
        for p in 0..self.game().players.len() {
            let mut bad = |s: &mut Self, z: NodeId| {
                let u = &s.game().tree.utilities(z).unwrap()[p];
                let u = if weaker { UtilityPair::real(u.real.clone()) } else { u.clone() };
                Ok(s.decide(&compare(CmpOp::Ge, &u, &UtilityPair::zero()))? == Truth::False)
            };
            let found = self.attacks(crate::game::Tree::ROOT, &|q| q != p, &mut bad)?;
            for a in found {
                let attack = self.choices(&a);
                out.push(CounterexampleKind::Harm { player: self.game().players[p].clone(), attack });
                if self.first {
                    return Ok(out);
                }
            }
        }
        Ok(out)
    }

    fn profit(&mut self) -> Result<Vec<CounterexampleKind>, AnalysisError> {
        let honest_leaf = self.game().resolve(&self.an.formula.history).map_err(EngineError::from)?;
        let honest_u = self.game().tree.utilities(honest_leaf).unwrap().to_vec();
        let mut out = Vec::new();
        let mut profiting = Vec::new();
        for group in coalitions(self.game().players.len()) {
            let target = group_sum(&honest_u, &group);
            let mut any = false;
            let mut bad = |s: &mut Self, z: NodeId| {
                let sum = group_sum(s.game().tree.utilities(z).unwrap(), &group);
                let gain = s.decide(&compare(CmpOp::Gt, &sum, &target))? == Truth::True;
                any |= gain;
                Ok(gain)
            };
            let found = self.attacks(crate::game::Tree::ROOT, &|q| group.contains(&q), &mut bad)?;
            let names: Vec<String> = group.iter().map(|p| self.game().players[*p].clone()).collect();
            if any {
                profiting.push(names.clone());
            }
            for a in found {
                let attack = self.choices(&a);
                out.push(CounterexampleKind::Profit { group: names.clone(), attack });
                if self.first {
                    return Ok(out);
                }
            }
        }
        if out.is_empty() && self.pending.is_none() && !profiting.is_empty() {
            out.push(CounterexampleKind::Conflict { groups: profiting });
        }
        Ok(out)
    }

    fn cmp(&mut self, p: PlayerId, z: NodeId, w: NodeId, op: CmpOp) -> Result<Truth, AnalysisError> {
        let u = self.game().tree.utilities(z).unwrap()[p].clone();
        let v = self.game().tree.utilities(w).unwrap()[p].clone();
        self.decide(&compare(op, &u, &v))
    }

    /// Leaves reachable by subgame-perfect play from `n`, over-approximated
    /// where comparisons are undetermined.
    fn practical(&mut self, n: NodeId, memo: &mut HashMap<NodeId, Vec<NodeId>>) -> Result<Vec<NodeId>, AnalysisError> {
        if let Some(v) = memo.get(&n) {
            return Ok(v.clone());
        }
        let tree = &self.an.game.tree;
        if tree.is_leaf(n) {
            return Ok(vec![n]);
        }
        let p = tree.player(n).unwrap();
        let children: Vec<NodeId> = tree.children(n).iter().map(|e| e.child).collect();
        let mut sets = Vec::new();
        for c in &children {
            sets.push(self.practical(*c, memo)?);
        }
        let mut out = Vec::new();
        for (i, set) in sets.iter().enumerate() {
            'leaf: for &z in set {
                for (j, other) in sets.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let mut answered = false;
                    for &w in other {
                        if self.cmp(p, z, w, CmpOp::Ge)? != Truth::False {
                            answered = true;
                            break;
                        }
                    }
                    if !answered {
                        continue 'leaf;
                    }
                }
                out.push(z);
            }
        }
        memo.insert(n, out.clone());
        Ok(out)
    }

    fn deviation(&mut self) -> Result<Vec<CounterexampleKind>, AnalysisError> {
        let h = self.an.formula.history.clone();
        let honest_leaf = self.game().resolve(&h).map_err(EngineError::from)?;
        let mut memo = HashMap::new();
        let mut out = Vec::new();
        for (n, chosen) in self.game().tree.path(honest_leaf) {
            let p = self.game().tree.player(n).unwrap();
            let edges = self.game().tree.children(n).to_vec();
            for (alt, edge) in edges.iter().enumerate() {
                if alt == chosen {
                    continue;
                }
                let set = self.practical(edge.child, &mut memo)?;
                let mut dominates = true;
                for &w in &set {
                    if self.cmp(p, w, honest_leaf, CmpOp::Gt)? != Truth::True {
                        dominates = false;
                        break;
                    }
                }
                if !dominates || set.is_empty() {
                    continue;
                }
                let mut best = set[0];
                for &w in &set[1..] {
                    if self.cmp(p, w, best, CmpOp::Gt)? == Truth::True {
                        best = w;
                    }
                }
                let tree = &self.game().tree;
                let mut sub = vec![edge.action.clone()];
                sub.extend(tree.path_between(edge.child, best).into_iter().map(|(m, c)| tree.children(m)[c].action.clone()));
                out.push(CounterexampleKind::Deviation {
                    player: self.game().players[p].clone(),
                    honest_prefix: tree.history_of(n),
                    subhistory: History(sub),
                });
                if self.first {
                    return Ok(out);
                }
            }
        }
        Ok(out)
    }
}

fn run(an: &mut Analyzer, case: &Case, first: bool) -> Result<Vec<Counterexample>, AnalysisError> {
    an.ctx.enter(case)?;
    let property = an.property();
    loop {
        let mut s = Search { an: &mut *an, first, pending: None };
        let kinds = match property {
            Property::WeakImmunity => s.harm(false),
            Property::WeakerImmunity => s.harm(true),
            Property::CollusionResilience => s.profit(),
            Property::Practicality => s.deviation(),
        }?;
        let pending = s.pending.take();
        let case = an.ctx.case().clone();
        if !kinds.is_empty() {
            return Ok(kinds.into_iter().map(|kind| Counterexample { case: case.clone(), kind }).collect());
        }
        match pending {
            Some(atom) => an.ctx.push_literal(atom)?,
            None => return Err(AnalysisError::NotFound(case.to_string())),
        }
    }
}

/// One counterexample for a violated case, possibly in a refinement of it.
pub fn counterexample(an: &mut Analyzer, case: &Case) -> Result<Counterexample, AnalysisError> {
    Ok(run(an, case, true)?.remove(0))
}

/// Every attack, group or deviation witnessing the violation.
pub fn all_counterexamples(an: &mut Analyzer, case: &Case) -> Result<Vec<Counterexample>, AnalysisError> {
    run(an, case, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineOptions;
    use crate::game::parse_game;
    use crate::solver::testing::backends;

    fn two_player() -> Game {
        parse_game(include_str!("../../games/two_player.json")).unwrap()
    }

    #[test]
    fn two_player_weak_immunity() {
        let g = two_player();
        let h = g.honest_histories[0].clone();
        for cfg in backends() {
            let mut an = Analyzer::new(&g, &h, Property::WeakImmunity, &cfg).unwrap();
            let r = an.run(EngineOptions::default()).unwrap();
            let (case, _) = r.violated_cases()[0];
            let ce = counterexample(&mut an, case).unwrap();
            assert_eq!(&ce.case, case);
            assert_eq!(
                ce.kind.to_string(),
                "Player A can be harmed if:\nPlayer B takes action l_B after history [r_A]"
            );
            assert_eq!(all_counterexamples(&mut an, case).unwrap().len(), 1);
        }
    }

    #[test]
    fn two_player_collusion_and_practicality() {
        let g = two_player();
        let h = g.honest_histories[0].clone();
        for cfg in backends() {
            let mut an = Analyzer::new(&g, &h, Property::CollusionResilience, &cfg).unwrap();
            let r = an.run(EngineOptions::default()).unwrap();
            let case = r.violated_cases()[0].0.clone();
            let all = all_counterexamples(&mut an, &case).unwrap();
            assert_eq!(all.len(), 1);
            assert_eq!(all[0].kind.to_string(), "Group [A] can profit if:\nPlayer A takes action l_A after history []");

            let mut an = Analyzer::new(&g, &h, Property::Practicality, &cfg).unwrap();
            let r = an.run(EngineOptions::default()).unwrap();
            let case = r.violated_cases()[0].0.clone();
            let ce = counterexample(&mut an, &case).unwrap();
            assert_eq!(
                ce.kind,
                CounterexampleKind::Deviation {
                    player: "A".into(),
                    honest_prefix: History::default(),
                    subhistory: History::new(["l_A"])
                }
            );
        }
    }
}
