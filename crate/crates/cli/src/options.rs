//! Command-line flags.

use std::path::PathBuf;

use checkmate_core::game::Property;
use checkmate_core::solver::BackendKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "checkmate",
    version,
    about = "Decides game-theoretic security of extensive-form games with symbolic utilities",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Game description in JSON.
    pub game: Option<PathBuf>,

    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Times bundled and generated games.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct RunFlags {
    /// Compute the weakest precondition of violated properties.
    #[arg(long)]
    pub preconditions: bool,
    /// Print one counterexample per violated case.
    #[arg(long)]
    pub counterexamples: bool,
    /// Print every counterexample per violated case.
    #[arg(long = "all_counterexamples", alias = "all-counterexamples")]
    pub all_counterexamples: bool,
    /// Explore all cases instead of stopping at the first violation.
    #[arg(long = "all_cases", alias = "all-cases")]
    pub all_cases: bool,
    /// Print a witness strategy per case of satisfied properties.
    #[arg(long)]
    pub strategies: bool,
    #[arg(long = "weak_immunity", alias = "weak-immunity")]
    pub weak_immunity: bool,
    #[arg(long = "weaker_immunity", alias = "weaker-immunity")]
    pub weaker_immunity: bool,
    #[arg(long = "collusion_resilience", alias = "collusion-resilience")]
    pub collusion_resilience: bool,
    #[arg(long)]
    pub practicality: bool,
    /// Also write the report as JSON.
    #[arg(long = "json-out", value_name = "PATH")]
    pub json_out: Option<PathBuf>,
    /// Write every solver query to DIR.
    #[arg(long = "dump-smt", value_name = "DIR")]
    pub dump_smt: Option<PathBuf>,
    /// Seed for the solver.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
    pub solver: SolverChoice,
    /// Per-query time limit for the external solver.
    #[arg(long = "timeout-ms", value_name = "MS")]
    pub timeout_ms: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Extra game files to time.
    pub games: Vec<PathBuf>,
    /// Include the generated game with at least 20,000 nodes (weak immunity only).
    #[arg(long)]
    pub large: bool,
    #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
    pub solver: SolverChoice,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    #[default]
    Auto,
    Z3,
    Embedded,
}

impl From<SolverChoice> for BackendKind {
    fn from(c: SolverChoice) -> Self {
        match c {
            SolverChoice::Auto => BackendKind::Auto,
            SolverChoice::Z3 => BackendKind::Z3,
            SolverChoice::Embedded => BackendKind::Embedded,
        }
    }
}

/// What to compute, after flag implications are applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub preconditions: bool,
    pub counterexamples: bool,
    pub all_counterexamples: bool,
    pub all_cases: bool,
    pub strategies: bool,
    pub properties: Vec<Property>,
}

impl RunOptions {
    pub fn explore_all(&self) -> bool {
        self.all_cases || self.preconditions || self.all_counterexamples
    }
}

impl From<&RunFlags> for RunOptions {
    fn from(f: &RunFlags) -> Self {
        let selected = [f.weak_immunity, f.weaker_immunity, f.collusion_resilience, f.practicality];
        let mut properties: Vec<Property> =
            Property::ALL.into_iter().zip(selected).filter(|(_, on)| *on).map(|(p, _)| p).collect();
        if properties.is_empty() {
            properties = Property::ALL.to_vec();
        }
        RunOptions {
            preconditions: f.preconditions,
            counterexamples: f.counterexamples || f.all_counterexamples,
            all_counterexamples: f.all_counterexamples,
            all_cases: f.all_cases,
            strategies: f.strategies,
            properties,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("checkmate").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn implications() {
        let o = RunOptions::from(&parse(&["g.json", "--all_counterexamples"]).run);
        assert!(o.counterexamples && o.explore_all());
        assert_eq!(o.properties, Property::ALL.to_vec());
        let o = RunOptions::from(&parse(&["g.json", "--preconditions", "--practicality"]).run);
        assert!(o.explore_all() && !o.all_cases);
        assert_eq!(o.properties, vec![Property::Practicality]);
        assert!(!RunOptions::from(&parse(&["g.json"]).run).explore_all());
    }

    #[test]
    fn selection_keeps_canonical_order() {
        let o = RunOptions::from(&parse(&["g.json", "--practicality", "--weak-immunity"]).run);
        assert_eq!(o.properties, vec![Property::WeakImmunity, Property::Practicality]);
    }

    #[test]
    fn bench_subcommand() {
        let cli = parse(&["bench", "--large"]);
        assert!(matches!(cli.command, Some(Command::Bench(BenchArgs { large: true, .. }))));
        assert!(Cli::try_parse_from(["checkmate", "g.json", "--seed", "x"]).is_err());
    }
}
