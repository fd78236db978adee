//! Brute-force reference semantics on games with concrete utilities.
//!
//! Nothing here goes through formulas or solvers: expressions are evaluated
//! to exact (real, infinitesimal) pairs, compared lexicographically, and the
//! properties are checked by enumerating honest-extending strategies.

pub mod differential;
pub mod generate;
pub mod suite;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use differential::{differential_run, DiffError, DiffReport, Mismatch};
pub use generate::{random_document, random_game, GenParams};
pub use suite::{check_game, check_instance, closure_run, sampling_run, ClosureStats, InstanceCheck, SampleReport};

use crate::game::{Game, GameError, History, NodeId, NodeKind, PlayerId, Property, Tree};
use crate::term::{CmpOp, Expr, Rational};

/// Enumeration guard on the number of strategies.
pub const DEFAULT_GUARD: u64 = 1_000_000;

/// An exact utility: real part, then the coefficient of the infinitesimal.
pub type Value = (Rational, Rational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("symbol `{0}` has no value")]
    Unassigned(String),
    #[error("{0} strategies exceed the enumeration guard")]
    GuardExceeded(u64),
    #[error("assignment violates constraint `{0}`")]
    AssumptionViolated(String),
    #[error("product of two infinitesimal values")]
    InfinitesimalProduct,
    #[error("expression `{0}` is not a constraint")]
    NotConstraint(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

fn zero() -> Rational {
    Rational::from_integer(0.into())
}

/// Evaluates an arithmetic expression; infinitesimal symbols are `(0, 1)`.
pub fn eval(e: &Expr, game: &Game, env: &HashMap<String, Rational>) -> Result<Value, OracleError> {
    Ok(match e {
        Expr::Lit(r) => (r.clone(), zero()),
        Expr::Sym(s) if game.symbols.is_infinitesimal(s) => (zero(), Rational::from_integer(1.into())),
        Expr::Sym(s) => (env.get(s).cloned().ok_or_else(|| OracleError::Unassigned(s.clone()))?, zero()),
        Expr::Neg(x) => {
            let (a, b) = eval(x, game, env)?;
            (-a, -b)
        }
        Expr::Add(x, y) => {
            let ((a, b), (c, d)) = (eval(x, game, env)?, eval(y, game, env)?);
            (a + c, b + d)
        }
        Expr::Sub(x, y) => {
            let ((a, b), (c, d)) = (eval(x, game, env)?, eval(y, game, env)?);
            (a - c, b - d)
        }
        Expr::Mul(x, y) => {
            let ((a, b), (c, d)) = (eval(x, game, env)?, eval(y, game, env)?);
            if b != zero() && d != zero() {
                return Err(OracleError::InfinitesimalProduct);
            }
            (&a * &c, &a * &d + &b * &c)
        }
        Expr::Cmp(..) | Expr::Or(..) => return Err(OracleError::NotConstraint(e.to_string())),
    })
}

/// Truth of a constraint under lexicographic comparison.
pub fn holds(e: &Expr, game: &Game, env: &HashMap<String, Rational>) -> Result<bool, OracleError> {
    match e {
        Expr::Cmp(op, l, r) => Ok(op.holds(&eval(l, game, env)?, &eval(r, game, env)?)),
        Expr::Or(l, r) => Ok(holds(l, game, env)? || holds(r, game, env)?),
        _ => Err(OracleError::NotConstraint(e.to_string())),
    }
}

/// A game together with exact leaf values at one assignment.
pub struct ConcreteGame<'g> {
    pub game: &'g Game,
    pub env: HashMap<String, Rational>,
    values: Vec<Option<Vec<Value>>>,
}

impl<'g> ConcreteGame<'g> {
    /// Evaluates every leaf; fails if the initial constraints do not hold.
    pub fn new(game: &'g Game, env: HashMap<String, Rational>) -> Result<Self, OracleError> {
        for c in &game.initial_constraints {
            if !holds(c, game, &env)? {
                return Err(OracleError::AssumptionViolated(c.to_string()));
            }
        }
        let mut values = Vec::with_capacity(game.tree.len());
        for id in 0..game.tree.len() {
            values.push(match &game.tree.node(id).kind {
                NodeKind::Leaf { values, .. } => {
                    Some(values.iter().map(|v| eval(v, game, &env)).collect::<Result<Vec<_>, _>>()?)
                }
                NodeKind::Branch { .. } => None,
            });
        }
        Ok(ConcreteGame { game, env, values })
    }

    pub fn tree(&self) -> &Tree {
        &self.game.tree
    }

    pub fn value(&self, leaf: NodeId, p: PlayerId) -> &Value {
        &self.values[leaf].as_ref().expect("leaf")[p]
    }

    fn group_value(&self, leaf: NodeId, group: &[PlayerId]) -> Value {
        group.iter().fold((zero(), zero()), |(a, b), p| {
            let (c, d) = self.value(leaf, *p);
            (a + c, b + d)
        })
    }

    fn satisfies_property_constraints(&self, property: Property) -> Result<(), OracleError> {
        for c in self.game.property_constraints(property) {
            if !holds(c, self.game, &self.env)? {
                return Err(OracleError::AssumptionViolated(c.to_string()));
            }
        }
        Ok(())
    }

    /// Leaf reached from `n` when everyone follows `sigma`.
    fn outcome(&self, sigma: &[usize], mut n: NodeId) -> NodeId {
        while !self.tree().is_leaf(n) {
            n = self.tree().children(n)[sigma[n]].child;
        }
        n
    }

    /// Worst value for `p` following `sigma` against arbitrary opponents.
    fn worst(&self, sigma: &[usize], p: PlayerId, weaker: bool, n: NodeId) -> Value {
        if self.tree().is_leaf(n) {
            let (r, i) = self.value(n, p).clone();
            return if weaker { (r, zero()) } else { (r, i) };
        }
        let children = self.tree().children(n);
        if self.tree().player(n) == Some(p) {
            return self.worst(sigma, p, weaker, children[sigma[n]].child);
        }
        children.iter().map(|e| self.worst(sigma, p, weaker, e.child)).min().unwrap()
    }

    /// Best joint value for `group` deviating freely while others follow `sigma`.
    fn best(&self, sigma: &[usize], group: &[PlayerId], n: NodeId) -> Value {
        if self.tree().is_leaf(n) {
            return self.group_value(n, group);
        }
        let children = self.tree().children(n);
        if group.contains(&self.tree().player(n).unwrap()) {
            return children.iter().map(|e| self.best(sigma, group, e.child)).max().unwrap();
        }
        self.best(sigma, group, children[sigma[n]].child)
    }

    /// Whether the full strategy `sigma` (indexed by node) witnesses `property`.
    pub fn strategy_satisfies(&self, sigma: &[usize], h: &History, property: Property) -> Result<bool, OracleError> {
        let players = self.game.players.len();
        Ok(match property {
            Property::WeakImmunity | Property::WeakerImmunity => {
                let weaker = property == Property::WeakerImmunity;
                (0..players).all(|p| self.worst(sigma, p, weaker, Tree::ROOT) >= (zero(), zero()))
            }
            Property::CollusionResilience => {
                let honest = self.game.resolve(h)?;
                subsets(players).iter().all(|g| self.best(sigma, g, Tree::ROOT) <= self.group_value(honest, g))
            }
            Property::Practicality => self.tree().internal_nodes().into_iter().all(|n| {
                let p = self.tree().player(n).unwrap();
                let edges = self.tree().children(n);
                let chosen = self.value(self.outcome(sigma, edges[sigma[n]].child), p).clone();
                edges.iter().all(|e| chosen >= *self.value(self.outcome(sigma, e.child), p))
            }),
        })
    }

    /// Every strategy agreeing with `h` on its path, as node-indexed choices.
    pub fn honest_strategies(&self, h: &History, guard: u64) -> Result<Vec<Vec<usize>>, OracleError> {
        let honest = self.tree().honest_choices(h)?;
        let free: Vec<NodeId> = self.tree().internal_nodes().into_iter().filter(|n| !honest.contains_key(n)).collect();
        let mut count: u64 = 1;
        for n in &free {
            count = count.saturating_mul(self.tree().children(*n).len() as u64);
        }
        if count > guard {
            return Err(OracleError::GuardExceeded(count));
        }
        let mut base = vec![usize::MAX; self.tree().len()];
        for (n, c) in &honest {
            base[*n] = *c;
        }
        for n in &free {
            base[*n] = 0;
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut sigma = base;
        loop {
            out.push(sigma.clone());
            let mut i = 0;
            loop {
                if i == free.len() {
                    return Ok(out);
                }
                let n = free[i];
                sigma[n] += 1;
                if sigma[n] < self.tree().children(n).len() {
                    break;
                }
                sigma[n] = 0;
                i += 1;
            }
        }
    }
}

/// Nonempty proper subsets of `players`, by bitmask.
fn subsets(players: usize) -> Vec<Vec<PlayerId>> {
    if players < 2 {
        return Vec::new();
    }
    (1u32..(1 << players) - 1).map(|m| (0..players).filter(|p| m >> p & 1 == 1).collect()).collect()
}

/// Decides `property` for `h` by exhaustive enumeration of strategies.
pub fn oracle_check(cg: &ConcreteGame, h: &History, property: Property, guard: u64) -> Result<bool, OracleError> {
    cg.satisfies_property_constraints(property)?;
    for sigma in cg.honest_strategies(h, guard)? {
        if cg.strategy_satisfies(&sigma, h, property)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// An attack restricted to the nodes it is actually consulted at.
pub type AttackSet = BTreeMap<NodeId, usize>;

/// All restricted attacks by the players `free` says are attackers, such
/// that every honest-extending completion by the others ends in a leaf
/// where `bad` holds. Found by enumerating full attacker strategies.
pub fn enumerate_attacks(
    cg: &ConcreteGame,
    h: &History,
    free: &dyn Fn(PlayerId) -> bool,
    bad: &dyn Fn(NodeId) -> bool,
    guard: u64,
) -> Result<BTreeSet<AttackSet>, OracleError> {
    let tree = cg.tree();
    let honest = tree.honest_choices(h)?;
    let attacker_nodes: Vec<NodeId> =
        tree.internal_nodes().into_iter().filter(|n| free(tree.player(*n).unwrap())).collect();
    let mut count: u64 = 1;
    for n in &attacker_nodes {
        count = count.saturating_mul(tree.children(*n).len() as u64);
    }
    if count > guard {
        return Err(OracleError::GuardExceeded(count));
    }
    let mut tau = vec![0usize; tree.len()];
    let mut out = BTreeSet::new();
    loop {
        let mut visited = AttackSet::new();
        if all_bad(cg, &honest, free, bad, &tau, Tree::ROOT, &mut visited) {
            out.insert(visited);
        }
        let mut i = 0;
        loop {
            if i == attacker_nodes.len() {
                return Ok(out);
            }
            let n = attacker_nodes[i];
            tau[n] += 1;
            if tau[n] < tree.children(n).len() {
                break;
            }
            tau[n] = 0;
            i += 1;
        }
    }
}

fn all_bad(
    cg: &ConcreteGame,
    honest: &HashMap<NodeId, usize>,
    free: &dyn Fn(PlayerId) -> bool,
    bad: &dyn Fn(NodeId) -> bool,
    tau: &[usize],
    n: NodeId,
    visited: &mut AttackSet,
) -> bool {
    let tree = cg.tree();
    if tree.is_leaf(n) {
        return bad(n);
    }
    let children = tree.children(n);
    if free(tree.player(n).unwrap()) {
        visited.insert(n, tau[n]);
        return all_bad(cg, honest, free, bad, tau, children[tau[n]].child, visited);
    }
    if let Some(c) = honest.get(&n) {
        return all_bad(cg, honest, free, bad, tau, children[*c].child, visited);
    }
    let mut ok = true;
    for e in children {
        ok &= all_bad(cg, honest, free, bad, tau, e.child, visited);
    }
    ok
}

/// Harmful restricted attacks against `p`.
pub fn harm_attacks(cg: &ConcreteGame, h: &History, p: PlayerId, weaker: bool, guard: u64) -> Result<BTreeSet<AttackSet>, OracleError> {
    let bad = |z: NodeId| {
        let (r, i) = cg.value(z, p).clone();
        let v = if weaker { (r, zero()) } else { (r, i) };
        v < (zero(), zero())
    };
    enumerate_attacks(cg, h, &|q| q != p, &bad, guard)
}

/// Profitable restricted attacks by `group`.
pub fn profit_attacks(cg: &ConcreteGame, h: &History, group: &[PlayerId], guard: u64) -> Result<BTreeSet<AttackSet>, OracleError> {
    let target = cg.group_value(cg.game.resolve(h)?, group);
    let bad = |z: NodeId| cg.group_value(z, group) > target;
    enumerate_attacks(cg, h, &|q| group.contains(&q), &bad, guard)
}

/// Outcomes of subgame-perfect strategies of the subgame at `n`.
pub fn spe_outcomes(cg: &ConcreteGame, n: NodeId, guard: u64) -> Result<BTreeSet<NodeId>, OracleError> {
    let tree = cg.tree();
    let nodes: Vec<NodeId> = tree.preorder_from(n).into_iter().filter(|m| !tree.is_leaf(*m)).collect();
    let mut count: u64 = 1;
    for m in &nodes {
        count = count.saturating_mul(tree.children(*m).len() as u64);
    }
    if count > guard {
        return Err(OracleError::GuardExceeded(count));
    }
    let mut sigma = vec![0usize; tree.len()];
    let mut out = BTreeSet::new();
    loop {
        let perfect = nodes.iter().all(|m| {
            let p = tree.player(*m).unwrap();
            let edges = tree.children(*m);
            let chosen = cg.value(cg.outcome(&sigma, edges[sigma[*m]].child), p).clone();
            edges.iter().all(|e| chosen >= *cg.value(cg.outcome(&sigma, e.child), p))
        });
        if perfect {
            out.insert(cg.outcome(&sigma, n));
        }
        let mut i = 0;
        loop {
            if i == nodes.len() {
                return Ok(out);
            }
            let m = nodes[i];
            sigma[m] += 1;
            if sigma[m] < tree.children(m).len() {
                break;
            }
            sigma[m] = 0;
            i += 1;
        }
    }
}

/// Whether deviating at the end of `prefix` into `subhistory` is a profitable
/// practical deviation: the subhistory is subgame-perfect play and every
/// subgame-perfect outcome after the first deviating action beats the honest
/// leaf for the mover.
pub fn deviation_is_profitable(
    cg: &ConcreteGame,
    h: &History,
    prefix: &History,
    subhistory: &History,
    guard: u64,
) -> Result<bool, OracleError> {
    let tree = cg.tree();
    let n = tree.resolve(prefix)?;
    let Some(p) = tree.player(n) else { return Ok(false) };
    let honest_leaf = cg.game.resolve(h)?;
    let Some(first) = subhistory.0.first() else { return Ok(false) };
    let Some(edge) = tree.children(n).iter().find(|e| &e.action == first) else { return Ok(false) };
    let mut full = prefix.clone();
    full.0.extend(subhistory.0.iter().cloned());
    let target = tree.resolve(&full)?;
    let outcomes = spe_outcomes(cg, edge.child, guard)?;
    let honest_value = cg.value(honest_leaf, p);
    Ok(outcomes.contains(&target) && outcomes.iter().all(|z| cg.value(*z, p) > honest_value))
}

/// Lexicographic comparison helper exposed for tests.
pub fn compare_values(op: CmpOp, a: &Value, b: &Value) -> bool {
    op.holds(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::parse_game;
    use crate::term::int;

    fn two_player() -> Game {
        parse_game(include_str!("../../games/two_player.json")).unwrap()
    }

    fn at(g: &Game, a: i64, b: i64) -> ConcreteGame<'_> {
        ConcreteGame::new(g, HashMap::from([("a".into(), int(a)), ("b".into(), int(b))])).unwrap()
    }

    #[test]
    fn two_player_verdicts() {
        let g = two_player();
        let h = &g.honest_histories[0];
        assert!(oracle_check(&at(&g, 3, 1), h, Property::WeakImmunity, DEFAULT_GUARD).unwrap());
        assert!(!oracle_check(&at(&g, 1, 1), h, Property::WeakImmunity, DEFAULT_GUARD).unwrap());
        for a in 1..6 {
            for b in -3..4 {
                let cg = at(&g, a, b);
                assert!(!oracle_check(&cg, h, Property::Practicality, DEFAULT_GUARD).unwrap());
                assert!(!oracle_check(&cg, h, Property::CollusionResilience, DEFAULT_GUARD).unwrap());
            }
        }
    }

    #[test]
    fn violated_assumption_is_reported() {
        let g = two_player();
        let env = HashMap::from([("a".into(), int(-1)), ("b".into(), int(0))]);
        assert!(matches!(ConcreteGame::new(&g, env), Err(OracleError::AssumptionViolated(_))));
    }

    #[test]
    fn two_player_attacks_and_deviation() {
        let g = two_player();
        let h = &g.honest_histories[0];
        let cg = at(&g, 1, 1);
        let harm = harm_attacks(&cg, h, 0, false, DEFAULT_GUARD).unwrap();
        assert_eq!(harm, BTreeSet::from([AttackSet::from([(2, 0)])]));
        let profit = profit_attacks(&cg, h, &[0], DEFAULT_GUARD).unwrap();
        assert_eq!(profit, BTreeSet::from([AttackSet::from([(0, 0)])]));
        assert!(deviation_is_profitable(&cg, h, &History::default(), &History::new(["l_A"]), DEFAULT_GUARD).unwrap());
        assert!(!deviation_is_profitable(&cg, h, &History::new(["r_A"]), &History::new(["r_B"]), DEFAULT_GUARD).unwrap());
    }

    #[test]
    fn lexicographic_order() {
        let small_pos = (int(0), int(1));
        assert!(compare_values(CmpOp::Gt, &small_pos, &(int(0), int(0))));
        assert!(compare_values(CmpOp::Lt, &small_pos, &(crate::term::ratio(1, 1000), int(-50))));
    }
}
