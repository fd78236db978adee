//! Timing harness over the bundled and generated games.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use checkmate_core::game::{parse_game, Game, Property};
use checkmate_core::oracle::{random_game, GenParams};
use checkmate_core::solver::SolverConfig;

use crate::options::RunOptions;
use crate::report::Verdict;
use crate::run::{run_game, RunError};

/// The two-player example shipped with the core crate.
pub const TWO_PLAYER: &str = include_str!("../../core/games/two_player.json");

pub struct BenchGame {
    pub name: String,
    pub game: Game,
    pub properties: Vec<Property>,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub name: String,
    pub nodes: usize,
    pub players: usize,
    pub histories: usize,
    pub seconds: f64,
    pub verdicts: Vec<(Property, Verdict)>,
}

/// Generated game with at least `nodes` nodes, one symbolic constant.
pub fn generated(nodes: usize, properties: Vec<Property>) -> BenchGame {
    let game = random_game(&GenParams::sized(nodes, 1, nodes as u64));
    BenchGame { name: format!("generated-{nodes}"), game, properties }
}

pub fn default_suite(large: bool) -> Vec<BenchGame> {
    let mut out = vec![
        BenchGame {
            name: "two-player".into(),
            game: parse_game(TWO_PLAYER).expect("bundled game parses"),
            properties: Property::ALL.to_vec(),
        },
        generated(50, Property::ALL.to_vec()),
        generated(200, Property::ALL.to_vec()),
    ];
    if large {
        out.push(generated(20_000, vec![Property::WeakImmunity]));
    }
    out
}

pub fn load(path: &PathBuf) -> Result<BenchGame, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let game = parse_game(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(BenchGame { name, game, properties: Property::ALL.to_vec() })
}

pub fn time_game(g: &BenchGame, config: &SolverConfig) -> Result<BenchRow, RunError> {
    let opts = RunOptions {
        preconditions: false,
        counterexamples: false,
        all_counterexamples: false,
        all_cases: false,
        strategies: false,
        properties: g.properties.clone(),
    };
    let start = Instant::now();
    let reports = run_game(&g.game, &opts, config, &mut std::io::sink())?;
    let seconds = start.elapsed().as_secs_f64();
    let mut verdicts: Vec<(Property, Verdict)> = Vec::new();
    for p in &g.properties {
        let mut v = Verdict::Yes;
        for r in reports.iter().filter(|r| r.property == *p) {
            v = match (v, r.verdict) {
                (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
                (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
                _ => Verdict::Yes,
            };
        }
        verdicts.push((*p, v));
    }
    let stats = g.game.stats();
    Ok(BenchRow {
        name: g.name.clone(),
        nodes: stats.nodes,
        players: stats.players,
        histories: stats.histories,
        seconds,
        verdicts,
    })
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "yes",
        Verdict::No => "no",
        Verdict::Unknown => "unknown",
    }
}

pub fn write_table(rows: &[BenchRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{:<18} {:>8} {:>8} {:>10} {:>10}  verdicts", "name", "nodes", "players", "histories", "seconds")?;
    for r in rows {
        let verdicts: Vec<String> =
            r.verdicts.iter().map(|(p, v)| format!("{}={}", p.key(), verdict_text(*v))).collect();
        writeln!(
            out,
            "{:<18} {:>8} {:>8} {:>10} {:>10.3}  {}",
            r.name,
            r.nodes,
            r.players,
            r.histories,
            r.seconds,
            verdicts.join(" ")
        )?;
    }
    Ok(())
}
