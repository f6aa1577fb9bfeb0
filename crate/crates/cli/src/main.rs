//! `hats`: exact analysis, search, simulation, team plans and the
//! verification suites from the command line.
//!
//! Reports go to stdout and are byte-identical for identical arguments;
//! progress and timings go to stderr. Exit status is 0 on success, 1 when
//! a check fails and 2 on invalid input.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hats::exact::{exact_distribution_of, search_strategy_space, verify_independence_within, Objective};
use hats::montecarlo::{checkpoint_grid, checkpoints, checkpoints_csv, run_report, simulate, Engine};
use hats::plan::{generate_plan_for_targets, generate_plan_with, PlanOptions};
use hats::strategies::blocks::BlockSchedule;
use hats::suites::{run_suite, Suite};
use hats::{validate_plan, Rational, StrategySpec, TeamMode};

/// Version of the `exact` and `search` documents.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "hats", version, about = "Hat-guessing strategies: exact analysis and simulation")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact distribution of the fraction of correct guesses among n players.
    Exact {
        /// Preset name, inline JSON spec, or @file.
        #[arg(long)]
        strategy: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        out: Format,
    },
    /// Exhaustive search over all deterministic strategies for n <= 4 players.
    Search {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::AllCorrect)]
        objective: ObjectiveArg,
    },
    /// Seeded simulation; one JSON line per run.
    Simulate {
        #[arg(long)]
        strategy: Option<String>,
        /// Block schedule; selects the block strategy.
        #[arg(long, value_enum)]
        blocks: Option<BlocksArg>,
        #[arg(long = "N", default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start of the window for the lower/upper density estimates.
        #[arg(long, default_value_t = 100)]
        k_min: u64,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        /// Write Z̄ at checkpoint indices to this CSV file.
        #[arg(long)]
        checkpoints: Option<std::path::PathBuf>,
    },
    /// Generate a team plan as JSON.
    Plan {
        /// Upper target in (1/2, 1], or the high target of an alternating plan.
        #[arg(long)]
        u: Rational,
        /// Lower target; 1/2 unless given.
        #[arg(long)]
        l: Option<Rational>,
        #[arg(long, default_value_t = 12)]
        teams: u64,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Run the independent plan checker; its report goes to stderr.
        #[arg(long)]
        validate: bool,
    },
    /// Run acceptance suites and print a JSON report.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    AllCorrect,
    Guaranteed,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlocksArg {
    Geometric,
    Factorial,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Players,
    Segments,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Win,
    Lose,
    Alternating,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Finite,
    Infinite,
    Appendix,
    Colors,
    All,
}

enum Outcome {
    Passed,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let result = match &cli.output {
        Some(path) => std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .and_then(|f| {
                let mut w = std::io::BufWriter::new(f);
                let r = run(cli.command, &mut w)?;
                w.flush()?;
                Ok(r)
            }),
        None => run(cli.command, &mut std::io::stdout().lock()),
    };
    eprintln!("elapsed: {:.2}s", start.elapsed().as_secs_f64());
    match result {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Exact { strategy, n, out: format } => {
            let spec = StrategySpec::parse(&strategy, Some(n))?;
            let s = spec.build()?;
            let d = exact_distribution_of(&s, n)?;
            match format {
                Format::Csv => write!(out, "{}", d.to_csv())?,
                Format::Json => {
                    let independence: Vec<_> = (1..=n)
                        .map(|i| match verify_independence_within(&s, i, 20) {
                            Ok(r) => json!({"player": i, "window": r.window_size, "passed": r.passed}),
                            Err(e) => json!({"player": i, "skipped": e.to_string()}),
                        })
                        .collect();
                    let doc = json!({
                        "schema_version": SCHEMA_VERSION,
                        "strategy": spec,
                        "n": n,
                        "assignments": d.total.to_string(),
                        "distribution": d.atoms(),
                        "mean": d.mean().to_string(),
                        "total_probability": d.total_probability().to_string(),
                        "markov_holds": d.markov_holds(),
                        "independence": independence,
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
                }
            }
            Ok(Outcome::Passed)
        }
        Command::Search { n, objective } => {
            let objective = match objective {
                ObjectiveArg::AllCorrect => Objective::MaxAllCorrect,
                ObjectiveArg::Guaranteed => Objective::MaxGuaranteedFraction,
            };
            let r = search_strategy_space(n, objective)?;
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "n": r.n,
                "objective": r.objective,
                "optimum": r.optimum.to_string(),
                "witness": r.witness.tables,
                "examined": r.examined,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            Ok(Outcome::Passed)
        }
        Command::Simulate { strategy, blocks, n, runs, seed, k_min, engine, checkpoints: csv_path } => {
            let spec = match (blocks, strategy) {
                (Some(b), None) => StrategySpec::Block {
                    schedule: match b {
                        BlocksArg::Geometric => BlockSchedule::default(),
                        BlocksArg::Factorial => BlockSchedule::Factorial,
                    },
                },
                (None, Some(s)) => StrategySpec::parse(&s, None)?,
                (Some(_), Some(_)) => anyhow::bail!("--blocks selects the block strategy; drop --strategy"),
                (None, None) => anyhow::bail!("one of --strategy or --blocks is required"),
            };
            let s = spec.build()?;
            let engine = match engine {
                EngineArg::Auto => Engine::Auto,
                EngineArg::Players => Engine::Players,
                EngineArg::Segments => Engine::Segments,
            };
            let grid = checkpoint_grid(&s, n);
            let mut rows = Vec::new();
            let mut failed = false;
            for run in 0..runs {
                let sim = simulate(&s, n, seed, run, engine)?;
                let report = run_report(&s, &sim, seed, k_min, false);
                failed |= !report.sure.passed();
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
                if csv_path.is_some() {
                    rows.extend(checkpoints(&sim.trajectory, &grid).into_iter().map(|c| (run, c)));
                }
            }
            if let Some(path) = csv_path {
                std::fs::write(&path, checkpoints_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
            }
            if failed {
                eprintln!("sure checks failed");
            }
            Ok(if failed { Outcome::Failed } else { Outcome::Passed })
        }
        Command::Plan { u, l, teams, mode, validate } => {
            let lower = l.unwrap_or_else(Rational::half);
            let plan = match mode {
                None => generate_plan_for_targets(&lower, &u, teams)?,
                Some(m) => {
                    let m = match m {
                        ModeArg::Win => TeamMode::PlayToWin,
                        ModeArg::Lose => TeamMode::PlayToLose,
                        ModeArg::Alternating => TeamMode::Alternating,
                    };
                    generate_plan_with(&u, &lower, m, teams, &PlanOptions::default())?
                }
            };
            writeln!(out, "{}", plan.to_json())?;
            if validate {
                let report = validate_plan(&plan);
                eprintln!("{}", serde_json::to_string(&report)?);
                if !report.passed {
                    return Ok(Outcome::Failed);
                }
            }
            Ok(Outcome::Passed)
        }
        Command::Verify { suite, seed } => {
            let suite = match suite {
                SuiteArg::Finite => Suite::Finite,
                SuiteArg::Infinite => Suite::Infinite,
                SuiteArg::Appendix => Suite::Appendix,
                SuiteArg::Colors => Suite::Colors,
                SuiteArg::All => Suite::All,
            };
            let report = run_suite(suite, seed, |c, t| {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                eprintln!("criterion {} {verdict} ({:.1}s) {}: {}", c.id, t.as_secs_f64(), c.name, c.summary);
            })?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(if report.passed { Outcome::Passed } else { Outcome::Failed })
        }
    }
}
