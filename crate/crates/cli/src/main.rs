//! `affgame`: command-line front end for the affine game solvers.
//!
//! Every subcommand reads one JSON instance and writes one JSON report
//! `{"command", "tolerance", "input", "result"}`. `gen` writes the bare
//! instance so it can be piped into the other subcommands.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on malformed input.

mod commands;
mod input;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use affine_games::{Error, DEFAULT_TOL};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "affgame", version, about = "Solve and verify affine stopping games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, clap::Args)]
pub struct Options {
    /// Instance: a file path, `-` for stdin, inline JSON, or a built-in name
    /// (`paper-counterexample`, `grg-demo`).
    #[arg(long, global = true)]
    input: Option<String>,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tolerance: f64,
    /// Seed for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Comma separated player indices for `coalition`.
    #[arg(long, global = true)]
    pub coalition: Option<String>,
    /// Dimension cap for classification and enumeration, or the joint
    /// profile budget for the tree verifiers.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Add the elapsed wall time to the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    KMatrix,
    PMatrix,
    KGame,
    PGame,
    Tree,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal-minor classification of a matrix.
    Classify,
    /// SOL of a game, or an LCP solution when the input has `q` and `M`.
    Solve,
    /// All pure Nash profiles, optimal equilibria, value and WUC.
    Equilibria,
    /// Weak unilateral competitiveness check.
    Wuc,
    /// Sup-inf coalition values.
    Coalition,
    /// Zero-sum extension with a locked dummy player.
    Dummy,
    /// Redistribution game payoffs from `X`, `P` and `alpha`.
    Grg,
    /// Backward induction on a scenario tree.
    TreeSolve,
    /// Brute-force optimality check of the backward-induction profile.
    TreeVerify,
    /// Exhaustive search in the naive variant of the stopping game.
    NaiveCounterexample,
    /// Reflected backward recursion on a scenario tree.
    Bsde,
    /// Seeded random instance.
    Gen {
        #[arg(long, value_enum, default_value = "k-game")]
        kind: GenKind,
        #[arg(long, default_value_t = 3)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        #[arg(long, default_value_t = 2)]
        branching: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Solve => "solve",
            Command::Equilibria => "equilibria",
            Command::Wuc => "wuc",
            Command::Coalition => "coalition",
            Command::Dummy => "dummy",
            Command::Grg => "grg",
            Command::TreeSolve => "tree-solve",
            Command::TreeVerify => "tree-verify",
            Command::NaiveCounterexample => "naive-counterexample",
            Command::Bsde => "bsde",
            Command::Gen { .. } => "gen",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Malformed(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Ragged
            | Error::NonFinite
            | Error::Empty
            | Error::DimensionMismatch { .. }
            | Error::InvalidGame(_)
            | Error::InvalidProfile(_)
            | Error::InvalidAlpha(_)
            | Error::InvalidTree(_)
            | Error::MissingMatrix { .. } => CliError::Malformed(e.to_string()),
            other => CliError::Domain(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Malformed(_) => 2,
        }
    }

    fn report(&self) -> Value {
        match self {
            CliError::Malformed(msg) => json!({ "error": "malformed_input", "message": msg }),
            CliError::Domain(e) => json!({ "error": "domain", "message": e.to_string() }),
        }
    }
}

fn execute(cli: &Cli) -> Result<Value, CliError> {
    let opts = &cli.options;
    if !(opts.tolerance.is_finite() && opts.tolerance > 0.0) {
        return Err(CliError::Malformed("--tolerance must be positive".into()));
    }
    let started = Instant::now();
    let doc = match (&cli.command, opts.input.as_deref()) {
        (Command::Gen { .. }, _) | (Command::NaiveCounterexample, None) => None,
        (_, source) => Some(input::load(source)?),
    };
    let (echo, result) = commands::run(&cli.command, doc, opts)?;
    if let Command::Gen { .. } = cli.command {
        return Ok(result);
    }
    let mut report = json!({
        "command": cli.command.name(),
        "tolerance": opts.tolerance,
        "input": echo,
        "result": result,
    });
    if opts.timing {
        report["elapsed_ms"] = json!(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

fn emit(text: &str, output: Option<&str>) -> std::io::Result<()> {
    match output {
        Some(path) => fs::write(path, format!("{text}\n")),
        None => writeln!(std::io::stdout().lock(), "{text}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("JSON values serialize");
            if let Err(e) = emit(&text, cli.options.output.as_deref()) {
                eprintln!("{}", json!({ "error": "io", "message": e.to_string() }));
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.code())
        }
    }
}
