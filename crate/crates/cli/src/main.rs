mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use shiftgame::analysis::{min_regret_search, SearchOptions};
use shiftgame::colouring::{
    build_generic_pyramid_seeded, colouring_to_profile, detect_parity_infeasible, node_regrets, seed_colouring_with,
    solve_finite_game_with, verify_parity_with, Feasibility, PointGraph, SeedReading, SeedRule, SolveOptions,
};
use shiftgame::profiles::{eta_stats, harsanyi_regret_with, mc_regret_with, RegretOptions, StrategyProfile};
use shiftgame::rational::{to_f64, to_string};
use shiftgame::report::Provenance;
use shiftgame::{Error, Execution};

/// Exact verification and search engine for the shift-space game.
#[derive(Debug, Parser)]
#[command(name = "shiftgame", version)]
struct Cli {
    /// Run every data-parallel loop on the current thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Add wall-clock timing to the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    /// Print reports as JSON instead of text (verify only).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the printed constants of a lemma.
    Verify {
        #[arg(value_enum)]
        lemma: Lemma,
    },
    /// Minimise the largest Harsanyi regret over depth-0 or depth-1 profiles.
    Search(SearchArgs),
    /// Exact or Monte Carlo regret of a profile file.
    Regret(RegretArgs),
    /// Minority mass and parity-violation rate per depth, as CSV.
    Qseq {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Parity colouring of a pyramid or a graph file.
    Colour(ColourArgs),
    /// Equilibrium of the finite game on a graph file.
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Lemma {
    Lemma1,
    Lemma2,
    Lemma3,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    depth: u32,
    /// Grid points per coordinate.
    #[arg(long, default_value_t = 21)]
    grid: u32,
    /// Random starts (depth 1).
    #[arg(long, default_value_t = 16)]
    restarts: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step halvings during local refinement.
    #[arg(long, default_value_t = 0)]
    rounds: u32,
    /// Write the best profile to this file.
    #[arg(long)]
    profile_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RegretArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Estimate from this many samples instead of enumerating.
    #[arg(long)]
    mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deepest cylinder level enumerated exactly (at most 4).
    #[arg(long, default_value_t = 3)]
    cap: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Reading {
    AsWritten,
    Alternate,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
struct ColourSource {
    /// Depth of a generic pyramid with seeded random e-bits.
    #[arg(long)]
    pyramid: Option<u32>,
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ColourArgs {
    #[command(flatten)]
    source: ColourSource,
    /// Seed for the pyramid's e-bits.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which word family the second seed rule covers.
    #[arg(long, value_enum, default_value_t = Reading::AsWritten)]
    reading: Reading,
    /// Re-check the result independently.
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 200_000)]
    max_iterations: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

/// Graphs up to this size are also checked by trying every colouring.
const BRUTE_FORCE_NODES: usize = 20;

enum Failure {
    /// A verification did not pass; the report has been printed.
    Verification,
    Engine(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } | Error::ResourceLimit(_) => 3,
        Error::NonConvergence(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let start = Instant::now();
    match run(&cli, exec, start) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Engine(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) ends output quietly.
fn say(text: &str) {
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|()| out.flush()).is_err() {
        std::process::exit(0);
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, start: Instant, seed: Option<u64>, mut body: Value) {
    let obj = body.as_object_mut().expect("reports are objects");
    let mut report = serde_json::Map::new();
    report.insert("provenance".into(), json!(Provenance::new(seed)));
    report.append(obj);
    if cli.timing {
        report.insert("timing_ms".into(), json!(start.elapsed().as_millis() as u64));
    }
    say(&(serde_json::to_string_pretty(&Value::Object(report)).expect("reports serialise") + "\n"));
}

fn run(cli: &Cli, exec: Execution, start: Instant) -> Result<(), Failure> {
    match &cli.command {
        Command::Verify { lemma } => run_verify(cli, *lemma, start),
        Command::Search(args) => {
            let opts = SearchOptions {
                depth: args.depth,
                grid: args.grid,
                refinement_rounds: args.rounds,
                restarts: args.restarts,
                seed: args.seed,
                exec,
            };
            let result = min_regret_search(&opts)?;
            if let Some(path) = &args.profile_out {
                let text = serde_json::to_string_pretty(&result.best.profile).expect("profiles serialise");
                std::fs::write(path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            }
            emit(cli, start, Some(args.seed), json!({ "search": result }));
            Ok(())
        }
        Command::Regret(args) => {
            let profile = StrategyProfile::from_json(&read(&args.profile)?)?;
            match args.mc {
                Some(samples) => {
                    let report = mc_regret_with(&profile, samples, args.seed, exec)?;
                    emit(cli, start, Some(args.seed), json!({ "kind": "estimate", "regret": report }));
                }
                None => {
                    let opts = RegretOptions { exec, cap: args.cap, ..RegretOptions::default() };
                    let report = harsanyi_regret_with(&profile, &opts)?;
                    emit(cli, start, None, json!({ "kind": "exact", "regret": report }));
                }
            }
            Ok(())
        }
        Command::Qseq { profile } => {
            let profile = StrategyProfile::from_json(&read(profile)?)?;
            let stats = eta_stats(&profile);
            let mut out = String::from("depth,q,max_r,q_approx,max_r_approx\n");
            for level in &stats.levels {
                out += &format!(
                    "{},{},{},{},{}\n",
                    level.depth,
                    to_string(&level.q),
                    to_string(&level.max_r),
                    to_f64(&level.q),
                    to_f64(&level.max_r)
                );
            }
            say(&out);
            Ok(())
        }
        Command::Colour(args) => run_colour(cli, args, exec, start),
        Command::Solve(args) => {
            let graph = PointGraph::from_json(&read(&args.graph)?)?;
            let opts = SolveOptions {
                tolerance: args.tolerance,
                max_iterations: args.max_iterations,
                ..SolveOptions::default()
            };
            let solution = solve_finite_game_with(&graph, &opts)?;
            emit(cli, start, None, json!({ "solution": solution }));
            Ok(())
        }
    }
}

fn run_verify(cli: &Cli, lemma: Lemma, start: Instant) -> Result<(), Failure> {
    let (name, outcome) = match lemma {
        Lemma::Lemma1 => ("lemma1", verify::lemma1()),
        Lemma::Lemma2 => ("lemma2", verify::lemma2()),
        Lemma::Lemma3 => ("lemma3", verify::lemma3()),
    };
    let pass = outcome.checks.iter().all(|c| c.pass);
    if cli.json {
        emit(
            cli,
            start,
            None,
            json!({ "lemma": name, "pass": pass, "checks": outcome.checks, "data": outcome.data }),
        );
    } else {
        let mut text = format!("shiftgame {} verify {name}\n", shiftgame::VERSION);
        for c in &outcome.checks {
            text += &format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            if let Some(note) = &c.note {
                text += &format!("     note: {note}\n");
            }
        }
        if let Some(table) = &outcome.table {
            text += table;
        }
        text += &format!("{name}: {}\n", if pass { "PASS" } else { "FAIL" });
        if cli.timing {
            text += &format!("timing_ms: {}\n", start.elapsed().as_millis());
        }
        say(&text);
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn bits(c: &shiftgame::colouring::Colouring) -> String {
    c.as_slice().iter().map(|v| v.map_or('.', |k| char::from(b'0' + k))).collect()
}

/// Every 0/1 colouring of a small graph, checked against the parity rule.
fn brute_force_feasible(graph: &PointGraph) -> bool {
    let n = graph.len();
    (0u64..1 << n).any(|mask| {
        let c = |v: usize| ((mask >> v) & 1) as u8;
        (0..n).all(|v| match graph.successors(v) {
            Some((a, b)) => c(v) == c(a) ^ c(b) ^ graph.e(v),
            None => true,
        })
    })
}

fn run_colour(cli: &Cli, args: &ColourArgs, exec: Execution, start: Instant) -> Result<(), Failure> {
    if let Some(depth) = args.source.pyramid {
        let graph = build_generic_pyramid_seeded(depth, args.seed)?;
        let rule = SeedRule {
            reading: match args.reading {
                Reading::AsWritten => SeedReading::AsWritten,
                Reading::Alternate => SeedReading::Alternate,
            },
            ..SeedRule::default()
        };
        let colouring = seed_colouring_with(&graph, &rule)?;
        let mut body = json!({
            "pyramid_depth": depth,
            "nodes": graph.len(),
            "interior": graph.interior_count(),
            "seed_rule": rule,
            "colouring": bits(&colouring),
        });
        let mut ok = true;
        if args.verify {
            let violations = verify_parity_with(&graph, &colouring, exec)?;
            let regret = node_regrets(&graph, &colouring_to_profile(&graph, &colouring)?);
            let max_regret = regret.max.clone();
            ok = violations.is_empty() && max_regret == shiftgame::rational::int(0);
            body["verification"] = json!({
                "parity_violations": violations.iter().map(|&v| graph.id(v)).collect::<Vec<_>>(),
                "max_node_regret": shiftgame::report::ExactValue::new(&max_regret),
                "pass": ok,
            });
        }
        emit(cli, start, Some(args.seed), body);
        return if ok { Ok(()) } else { Err(Failure::Verification) };
    }
    let path = args.source.graph.as_ref().expect("clap requires one source");
    let graph = PointGraph::from_json(&read(path)?)?;
    let small = graph.len() <= BRUTE_FORCE_NODES;
    let (mut body, ok) = match detect_parity_infeasible(&graph) {
        Feasibility::Feasible(c) => {
            let mut body = json!({ "status": "feasible", "colours": graph.colour_map(&c) });
            let mut ok = true;
            if args.verify {
                let violations = verify_parity_with(&graph, &c, exec)?;
                ok = violations.is_empty();
                body["verification"] = json!({ "parity_violations": violations.len(), "pass": ok });
            }
            (body, ok)
        }
        Feasibility::Infeasible(cert) => {
            let mut body = json!({
                "status": "infeasible",
                "certificate": cert,
                "forced": cert.forced().into_iter().map(|(id, k)| json!({ "node": id, "colour": k })).collect::<Vec<_>>(),
                "narrative": cert.render(),
            });
            let mut ok = true;
            if args.verify {
                let replay = cert.replay();
                let brute = small.then(|| !brute_force_feasible(&graph));
                ok = replay.is_ok() && brute != Some(false);
                body["verification"] = json!({
                    "replay": replay.err().unwrap_or_else(|| "ok".into()),
                    "brute_force_infeasible": brute,
                    "pass": ok,
                });
            }
            (body, ok)
        }
    };
    body["nodes"] = json!(graph.len());
    emit(cli, start, None, body);
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
