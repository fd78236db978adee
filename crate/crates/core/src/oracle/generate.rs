//! Seeded random games in the input format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::game::{parse_game, Game};

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub max_depth: usize,
    pub max_branching: usize,
    pub min_branching: usize,
    pub players: usize,
    /// Real parts are drawn from this pool (decimal strings).
    pub values: Vec<String>,
    /// Chance that a game has an infinitesimal at all.
    pub infinitesimal_probability: f64,
    /// Chance that a non-root node above the depth limit is a leaf.
    pub leaf_probability: f64,
    /// Number of symbolic constants (named `a`, `b`, ...), at most 26.
    pub symbolic: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_depth: 4,
            max_branching: 3,
            min_branching: 1,
            players: 3,
            values: ["-3", "-2", "-1.5", "-1", "0", "0.5", "1", "2", "2.5", "3"].map(String::from).to_vec(),
            infinitesimal_probability: 0.3,
            leaf_probability: 0.35,
            symbolic: 0,
            seed: 0,
        }
    }
}

const PLAYER_NAMES: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";

struct Gen<'p> {
    p: &'p GenParams,
    rng: ChaCha8Rng,
    infinitesimal: bool,
    players: Vec<String>,
    constants: Vec<String>,
    leaves: Vec<Vec<String>>,
}

impl Gen<'_> {
    fn coefficient(&mut self) -> String {
        let k: i64 = self.rng.gen_range(-2..=2);
        k.to_string()
    }

    fn utility(&mut self) -> String {
        let mut text = self.p.values[self.rng.gen_range(0..self.p.values.len())].clone();
        for c in self.constants.clone() {
            if self.rng.gen_bool(0.6) {
                text = format!("{text} + {}*{c}", self.coefficient());
            }
        }
        if self.infinitesimal && self.rng.gen_bool(0.5) {
            text = format!("{text} + {}*eps", self.coefficient());
        }
        text
    }

    fn node(&mut self, depth: usize, history: Vec<String>) -> Json {
        let leaf = depth == self.p.max_depth || (depth > 0 && self.rng.gen_bool(self.p.leaf_probability));
        if leaf {
            self.leaves.push(history);
            let utility: Vec<Json> = self
                .players
                .clone()
                .into_iter()
                .map(|p| json!({"player": p, "value": self.utility()}))
                .collect();
            return json!({ "utility": utility });
        }
        let n = self.players.len();
        let jitter = if self.rng.gen_bool(0.3) { self.rng.gen_range(0..n) } else { 0 };
        let player = self.players[(depth + jitter) % n].clone();
        let k = self.rng.gen_range(self.p.min_branching.clamp(1, self.p.max_branching)..=self.p.max_branching);
        let children: Vec<Json> = (0..k)
            .map(|i| {
                let action = format!("x{i}");
                let mut h = history.clone();
                h.push(action.clone());
                json!({"action": action, "child": self.node(depth + 1, h)})
            })
            .collect();
        json!({"player": player, "children": children})
    }
}

impl GenParams {
    /// A complete ternary tree with at least `nodes` nodes.
    pub fn sized(nodes: usize, symbolic: usize, seed: u64) -> GenParams {
        let (mut depth, mut total, mut level) = (0, 1usize, 1usize);
        while total < nodes {
            depth += 1;
            level *= 3;
            total += level;
        }
        GenParams {
            max_depth: depth,
            max_branching: 3,
            min_branching: 3,
            leaf_probability: 0.0,
            symbolic,
            seed,
            ..GenParams::default()
        }
    }
}

/// The game as an input document.
pub fn random_document(params: &GenParams) -> Json {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let infinitesimal = rng.gen_bool(params.infinitesimal_probability);
    let players: Vec<String> = PLAYER_NAMES.chars().take(params.players.max(1)).map(String::from).collect();
    let constants: Vec<String> = "abcdefghijklmnopqrstuvwxyz".chars().take(params.symbolic).map(String::from).collect();
    let mut g = Gen { p: params, rng, infinitesimal, players: players.clone(), constants: constants.clone(), leaves: Vec::new() };
    let tree = g.node(0, Vec::new());
    let honest = g.leaves[g.rng.gen_range(0..g.leaves.len())].clone();
    let mut initial = Vec::new();
    if infinitesimal {
        initial.push("eps > 0".to_string());
    }
    for c in &constants {
        if g.rng.gen_bool(0.5) {
            let k: i64 = g.rng.gen_range(-2..=2);
            initial.push(format!("{c} > {k}"));
        }
    }
    let actions: Vec<String> = (0..params.max_branching.max(1)).map(|i| format!("x{i}")).collect();
    json!({
        "players": players,
        "actions": actions,
        "infinitesimals": if infinitesimal { vec!["eps"] } else { vec![] },
        "constants": constants,
        "initial_constraints": initial,
        "property_constraints": {
            "weak_immunity": [], "weaker_immunity": [], "collusion_resilience": [], "practicality": []
        },
        "honest_histories": [honest],
        "tree": tree,
    })
}

pub fn random_game(params: &GenParams) -> Game {
    parse_game(&random_document(params).to_string()).expect("generated games are well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let p = GenParams { seed: 7, ..GenParams::default() };
        assert_eq!(random_document(&p), random_document(&p));
    }

    #[test]
    fn single_branch() {
        let p = GenParams { max_depth: 1, max_branching: 1, players: 1, ..GenParams::default() };
        let g = random_game(&p);
        assert_eq!(g.stats().nodes, 2);
        assert_eq!(g.honest_histories[0].0, ["x0"]);
    }

    #[test]
    fn sized_games_reach_the_bound() {
        for n in [1, 2, 200, 1000] {
            let g = random_game(&GenParams::sized(n, 1, 3));
            assert!(g.stats().nodes >= n);
            assert!(g.stats().nodes < 3 * n.max(2));
        }
    }

    #[test]
    fn many_games_validate() {
        for seed in 0..500 {
            let p = GenParams { seed, symbolic: (seed % 3) as usize, ..GenParams::default() };
            let g = random_game(&p);
            assert!(g.stats().nodes >= 2);
        }
    }
}
