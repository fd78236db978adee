//! Command-line front end: flag handling, orchestration over honest
//! histories and properties, text and JSON reports, and a timing harness.

pub mod bench;
pub mod options;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::io::Write;

use checkmate_core::game::parse_game;
use checkmate_core::solver::SolverConfig;
use clap::error::ErrorKind;
use clap::Parser;

use options::{BenchArgs, Cli, Command, RunFlags, RunOptions};
use report::Report;
use run::{exit_code, run_game, RunError};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

fn solver_config(flags: &RunFlags) -> SolverConfig {
    SolverConfig {
        backend: flags.solver.into(),
        seed: flags.seed,
        timeout_ms: flags.timeout_ms,
        dump_dir: flags.dump_smt.clone(),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_HOLDS,
                _ => EXIT_INPUT,
            };
            let text = e.render().to_string();
            if code == EXIT_HOLDS {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match (&cli.command, &cli.game) {
        (Some(Command::Bench(args)), _) => bench(args, out, err),
        (None, Some(path)) => analyze(path, &cli.run, out, err),
        (None, None) => {
            let _ = writeln!(err, "error: missing game file (see --help)");
            EXIT_INPUT
        }
    }
}

fn analyze(path: &std::path::Path, flags: &RunFlags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return EXIT_INPUT;
        }
    };
    let game = match parse_game(&text) {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return EXIT_INPUT;
        }
    };
    if let Some(dir) = &flags.dump_smt {
        if let Err(e) = std::fs::create_dir_all(dir) {
            let _ = writeln!(err, "error: cannot create {}: {e}", dir.display());
            return EXIT_INPUT;
        }
    }
    let opts = RunOptions::from(flags);
    let config = solver_config(flags);
    let results = match run_game(&game, &opts, &config, out) {
        Ok(r) => r,
        Err(RunError::Input(e)) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_BACKEND;
        }
    };
    for r in &results {
        if let Some(e) = &r.error {
            let _ = writeln!(err, "warning: {} for history {}: {e}", r.property.key(), r.history);
        }
    }
    let code = exit_code(&results);
    if let Some(json_path) = &flags.json_out {
        let backend = match config.resolved_backend() {
            checkmate_core::solver::BackendKind::Z3 => "z3",
            _ => "embedded",
        };
        let report = Report { game: path.display().to_string(), backend: backend.into(), results, exit_code: code };
        let text = serde_json::to_string_pretty(&report).expect("reports serialize");
        if let Err(e) = std::fs::write(json_path, text + "\n") {
            let _ = writeln!(err, "error: cannot write {}: {e}", json_path.display());
            return EXIT_INPUT;
        }
    }
    code
}

fn bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = SolverConfig::with_backend(args.solver.into());
    let mut games = bench::default_suite(args.large);
    for path in &args.games {
        match bench::load(path) {
            Ok(g) => games.push(g),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INPUT;
            }
        }
    }
    let mut rows = Vec::new();
    for g in &games {
        match bench::time_game(g, &config) {
            Ok(r) => rows.push(r),
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", g.name);
                return EXIT_BACKEND;
            }
        }
    }
    let _ = bench::write_table(&rows, out);
    EXIT_HOLDS
}
