//! `qrdt`: coherence, lottery validation, preference and updating queries on JSON inputs.
//!
//! Every command prints one report (JSON by default) and exits with a code
//! from the table in [`error`].

mod commands;
mod error;
mod properties;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::{Outcome, RunConfig};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE, EXIT_VIOLATIONS};
use crate::properties::Suite;
use crate::report::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "qrdt", version, about = "Rational decisions over Hermitian gambles and quantum horse lotteries")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tolerance of the coherence decision.
    #[arg(long, global = true, default_value_t = RunConfig::default().psd_tol)]
    tol_psd: f64,

    /// Strictness threshold for desirability margins.
    #[arg(long, global = true, default_value_t = RunConfig::default().strict_eps)]
    eps_strict: f64,

    /// Target relative duality gap of the conic solver.
    #[arg(long, global = true, default_value_t = RunConfig::default().dual_gap)]
    gap: f64,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Progress and timing on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,

    /// Exit with 4 on negative verdicts (not preferred, boundary, not maximal, not factorizable).
    #[arg(long, global = true)]
    strict_exit: bool,

    /// Worker threads for property suites.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a block list is a quantum horse lottery.
    Validate { file: PathBuf },
    /// Check a finite assessment for avoiding partial loss.
    Coherence { file: PathBuf },
    /// Decide a preference query `{"relation", "P", "Q"}`.
    Prefer { file: PathBuf },
    /// Condition assessments or a state on a projective event.
    Condition { file: PathBuf },
    /// Recover the state behind a maximal assessment.
    Represent { file: PathBuf },
    /// Split a joint state into prize weights and a density matrix.
    Factorize { file: PathBuf },
    /// Monte Carlo payoffs of assessments under a state.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Run seeded property suites.
    Properties {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Cases per suite (suite defaults when omitted).
        #[arg(long)]
        cases: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Coherence { .. } => "coherence",
            Command::Prefer { .. } => "prefer",
            Command::Condition { .. } => "condition",
            Command::Represent { .. } => "represent",
            Command::Factorize { .. } => "factorize",
            Command::Simulate { .. } => "simulate",
            Command::Properties { .. } => "properties",
        }
    }
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match command {
        Command::Validate { file } => commands::validate(file),
        Command::Coherence { file } => commands::coherence(file, cfg),
        Command::Prefer { file } => commands::prefer(file, cfg),
        Command::Condition { file } => commands::condition(file, cfg),
        Command::Represent { file } => commands::represent(file, cfg),
        Command::Factorize { file } => commands::factorize(file, cfg),
        Command::Simulate { file, trials } => commands::simulate(file, *trials, cfg),
        Command::Properties { suite, cases } => {
            let results = properties::run(*suite, *cases, cfg.seed, cfg.workers);
            if cfg.verbose {
                for r in &results {
                    eprintln!("{} {} #{} seed {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.suite, r.case, r.seed, r.detail);
                }
            }
            let violations = results.iter().filter(|r| !r.passed).count();
            let (verdict, exit) = if violations == 0 { ("passed", EXIT_OK) } else { ("violations", EXIT_VIOLATIONS) };
            let result = json!({"cases": results.len(), "violations": violations, "results": results});
            Ok(Outcome { verdict: verdict.into(), result, exit, inputs: vec![] })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let cfg = RunConfig {
        psd_tol: cli.tol_psd,
        strict_eps: cli.eps_strict,
        dual_gap: cli.gap,
        seed: cli.seed,
        verbose: cli.verbose,
        strict_exit: cli.strict_exit,
        workers: cli.workers,
    };
    let start = Instant::now();
    let (report, code) = match execute(&cli.command, &cfg) {
        Ok(o) => (Report::new(cli.command.name(), cfg.settings_json(), o.inputs, &o.verdict, o.result), o.exit),
        Err(err) => {
            eprintln!("qrdt {}: {err}", cli.command.name());
            let result = json!({"kind": err.kind(), "message": err.to_string()});
            (Report::new(cli.command.name(), cfg.settings_json(), vec![], "error", result), err.exit_code())
        }
    };
    let mut report = report;
    if cfg.verbose {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        report.timing_ms = Some(ms);
        eprintln!("qrdt {}: {} in {ms:.1} ms (exit {code})", cli.command.name(), report.verdict);
    }
    print!("{}", report.render(cli.format));
    if cli.format == Format::Json {
        println!();
    }
    ExitCode::from(code as u8)
}
