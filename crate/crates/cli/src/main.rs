//! `isoprofile`: exact isoperimetric profiles, tilings, Rokhlin towers and
//! bound checks from the command line.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or schema error,
//! 3 budget exhaustion.

mod commands;
mod failure;
mod inputs;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isoprofile::action_profile::SearchMode;
use serde_json::{json, Value};

use crate::commands::{ActionArgs, Artifact};
use crate::failure::{Failure, Outcome, EXIT_BUDGET, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "isoprofile", version, about = "Isoperimetric profiles of groups and of their actions")]
struct Cli {
    #[command(flatten)]
    budgets: Budgets,

    #[command(subcommand)]
    command: Command,
}

/// Resource limits. Each can also be set through its environment variable.
#[derive(Args, Clone, Debug)]
pub struct Budgets {
    /// Connected sets visited by `profile-group`.
    #[arg(long, global = true, env = "ISOPROFILE_SET_BUDGET", default_value_t = isoprofile::isoperimetry::DEFAULT_SET_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub set_budget: u64,

    /// Search nodes for exact action profiles.
    #[arg(long, global = true, env = "ISOPROFILE_NODE_BUDGET", default_value_t = isoprofile::action_profile::DEFAULT_NODE_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub node_budget: u64,

    /// Candidate cells for exact action profiles.
    #[arg(long, global = true, env = "ISOPROFILE_CELL_BUDGET", default_value_t = isoprofile::action_profile::DEFAULT_CELL_BUDGET,
          value_parser = positive_usize)]
    pub cell_budget: usize,

    /// Largest window radius for `verify-tile`.
    #[arg(long, global = true, env = "ISOPROFILE_MAX_RADIUS", default_value_t = 64,
          value_parser = clap::value_parser!(u32).range(1..))]
    pub max_radius: u32,

    /// Largest graphing accepted or built.
    #[arg(long, global = true, env = "ISOPROFILE_MAX_VERTICES", default_value_t = 1_000_000,
          value_parser = positive_usize)]
    pub max_vertices: usize,

    /// Wall-clock limit in seconds; unlimited when absent.
    #[arg(long, global = true, env = "ISOPROFILE_TIME_LIMIT",
          value_parser = clap::value_parser!(u64).range(1..))]
    pub time_limit: Option<u64>,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    BranchAndBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphingKind {
    Torus,
    Heisenberg,
    Cycle,
}

#[derive(Subcommand)]
enum Command {
    /// Exact profile I(1..=n_max) of a marked group.
    ProfileGroup {
        /// Group JSON, e.g. '{"kind":"Zd","d":1}' (or @file).
        #[arg(long)]
        group: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
        n_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a decimal column rounded to 12 places.
        #[arg(long)]
        decimal: bool,
    },
    /// Action profile of a graphing at n, exactly or from a tiling.
    ProfileAction {
        /// Graphing JSON or builder spec (or @file).
        #[arg(long)]
        graphing: String,
        #[arg(long, value_parser = positive_usize)]
        n: usize,
        /// Exact search (the default).
        #[arg(long, conflicts_with = "tiling")]
        exact: bool,
        /// Search strategy for the exact profile.
        #[arg(long, value_enum, conflicts_with = "tiling")]
        mode: Option<Mode>,
        /// Tile JSON (or @file): upper bound from a Rokhlin tower partition.
        #[arg(long, requires = "epsilon")]
        tiling: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        decimal: bool,
    },
    /// Check that a (multi-)tile's translates partition a ball.
    VerifyTile {
        #[arg(long)]
        group: String,
        #[arg(long)]
        tile: String,
        #[arg(long)]
        window: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a torus, Heisenberg quotient or weighted cycle graphing.
    BuildGraphing {
        #[arg(long, value_enum)]
        kind: GraphingKind,
        /// Rank of the torus.
        #[arg(long)]
        d: Option<usize>,
        /// Side length (torus, Heisenberg) or number of uniform cycle vertices.
        #[arg(long)]
        m: Option<usize>,
        /// Comma-separated cycle weights, e.g. 1/2,1/4,1/4.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<String>>,
        /// Group JSON with custom generators (torus, cycle).
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy Rokhlin tower family for a tile on a graphing.
    BuildRokhlin {
        #[arg(long)]
        graphing: String,
        #[arg(long)]
        tile: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite of bound checks: lower-bound, tiling-upper-bound,
    /// generating-set or positivity.
    CheckBounds {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(commands::SUITES))]
        suite: String,
        /// Suite parameters as JSON (or @file).
        #[arg(long)]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        decimal: bool,
    },
    /// Heisenberg comparison table or the acceptance summary.
    Reproduce {
        #[arg(long, value_parser = ["heisenberg", "acceptance"])]
        suite: String,
        /// Comma-separated criterion ids (acceptance suite only).
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        decimal: bool,
    },
}

impl Command {
    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::ProfileGroup { out, .. }
            | Command::ProfileAction { out, .. }
            | Command::VerifyTile { out, .. }
            | Command::BuildGraphing { out, .. }
            | Command::BuildRokhlin { out, .. }
            | Command::CheckBounds { out, .. }
            | Command::Reproduce { out, .. } => out.as_ref(),
        }
    }
}

fn graphing_spec(
    kind: GraphingKind,
    d: Option<usize>,
    m: Option<usize>,
    weights: Option<Vec<String>>,
    group: Option<String>,
) -> Outcome<Value> {
    let mut spec = serde_json::Map::new();
    let name = match kind {
        GraphingKind::Torus => "torus",
        GraphingKind::Heisenberg => "heisenberg",
        GraphingKind::Cycle => "cycle",
    };
    spec.insert("kind".into(), json!(name));
    if let Some(d) = d {
        spec.insert("d".into(), json!(d));
    }
    if let Some(m) = m {
        spec.insert("m".into(), json!(m));
    }
    if let Some(w) = weights {
        spec.insert("weights".into(), json!(w));
    }
    if let Some(g) = group {
        spec.insert("group".into(), inputs::read_json("--group", &g)?);
    }
    Ok(Value::Object(spec))
}

fn execute(command: Command, b: &Budgets) -> Outcome<Artifact> {
    match command {
        Command::ProfileGroup { group, n_max, decimal, .. } => {
            commands::profile_group(&group, n_max as usize, decimal, b)
        }
        Command::ProfileAction { graphing, n, mode, tiling, epsilon, decimal, .. } => {
            let args = ActionArgs {
                graphing: &graphing,
                n,
                tiling: tiling.as_deref(),
                epsilon: epsilon.as_deref(),
                mode: mode.map(|m| match m {
                    Mode::Exhaustive => SearchMode::Exhaustive,
                    Mode::BranchAndBound => SearchMode::BranchAndBound,
                }),
                decimal,
            };
            commands::profile_action(&args, b)
        }
        Command::VerifyTile { group, tile, window, .. } => commands::verify_tile(&group, &tile, window, b),
        Command::BuildGraphing { kind, d, m, weights, group, .. } => {
            commands::build_graphing(graphing_spec(kind, d, m, weights, group)?, b)
        }
        Command::BuildRokhlin { graphing, tile, epsilon, .. } => {
            commands::build_rokhlin(&graphing, &tile, &epsilon, b)
        }
        Command::CheckBounds { suite, params, decimal, .. } => commands::check_bounds(&suite, &params, decimal, b),
        Command::Reproduce { suite, only, decimal, .. } => reproduce::run(&suite, only.as_deref(), decimal),
    }
}

/// Runs the command on a worker thread so that a time limit can end the
/// process before anything is written.
fn run(cli: Cli) -> Outcome<u8> {
    let out = cli.command.out().cloned();
    if let Some(path) = &out {
        output::check_writable(path)?;
    }
    let budgets = cli.budgets.clone();
    let limit = budgets.time_limit;
    let (tx, rx) = mpsc::channel();
    let command = cli.command;
    let worker = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || {
            let _ = tx.send(execute(command, &budgets));
        })
        .expect("spawn worker thread");
    let result = match limit {
        Some(secs) => match rx.recv_timeout(Duration::from_secs(secs)) {
            Ok(r) => r,
            Err(mpsc::RecvTimeoutError::Timeout) => {
                return Err(Failure::Budget(format!("time limit of {secs}s reached")))
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => panic_result(worker),
        },
        None => rx.recv().unwrap_or_else(|_| panic_result(worker)),
    };
    let artifact = result?;
    output::deliver(out.as_deref(), &artifact.body)?;
    if let Some(msg) = &artifact.message {
        eprintln!("isoprofile: {msg}");
    }
    Ok(artifact.code)
}

fn panic_result(worker: std::thread::JoinHandle<()>) -> Outcome<Artifact> {
    let _ = worker.join();
    Err(Failure::Usage("internal error: worker thread panicked".into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("isoprofile: {e}");
            let code = e.code();
            // a timed-out worker may still be running; do not wait for it
            if code == EXIT_BUDGET {
                std::process::exit(code as i32);
            }
            ExitCode::from(code)
        }
    }
}
