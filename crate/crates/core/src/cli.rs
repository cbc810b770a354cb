//! The `qbasis` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 parse, 3 convergence, 4 verification.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::quadrature::QuadratureConfig;
use crate::radial_basis::{azimuthal_eval, q_eval, BasisIndex};
use crate::synthesis::{self, SynthesisConfig};
use crate::table::CoefficientTable;
use crate::table_io::{self, EmitOptions, GridOptions};
use crate::verification::{run_checks, CheckTolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qbasis", version, about = "Orthogonal minimax basis functions over the unit circle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the coefficient table up to a maximum radial degree.
    Synth(SynthArgs),
    /// Audit a coefficient table.
    Check(CheckArgs),
    /// Tabulate selected functions on a uniform radial grid.
    Grid(GridArgs),
    /// Evaluate one function at a point.
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_max: u32,
    /// Newton convergence threshold on the residual max-norm.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Quadrature grid points, a power of two plus one.
    #[arg(long, default_value_t = 4097)]
    pub quad_points: usize,
    /// Initial Newton damping factor in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: u32,
    /// Guess strategies in the order they are tried.
    #[arg(long, value_delimiter = ',', default_value = "heuristic,lifted")]
    pub guess_order: Vec<String>,
    /// Solve the m = 0 and m = 2 families by Newton instead of closed forms.
    #[arg(long)]
    pub closed_form_diagnostics: bool,
    /// Write the closed-form entries to the coefficient file.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub include_closed_form: bool,
    /// Coefficient file; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub table: PathBuf,
    /// Largest accepted off-diagonal Gram entry.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Largest accepted deviation of a Gram diagonal entry from 1.
    #[arg(long, default_value_t = 1e-4)]
    pub diag_tol: f64,
    /// Largest accepted deviation of an extremum amplitude from |N|.
    #[arg(long, default_value_t = 1e-9)]
    pub amplitude_tol: f64,
    #[arg(long, default_value_t = 4097)]
    pub quad_points: usize,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    pub table: PathBuf,
    /// Comma-separated list such as `1:1,3:1,5:1`.
    #[arg(long)]
    pub indices: String,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(2..))]
    pub resolution: u64,
    #[arg(long)]
    pub with_zernike: bool,
    #[arg(long)]
    pub with_reduced: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub table: PathBuf,
    pub n: u32,
    pub m: u32,
    pub r: f64,
    pub phi: Option<f64>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::NonConvergence { .. }
            | Error::BranchRejected { .. }
            | Error::SingularSystem { .. }
            | Error::NoApplicableGuess { .. }
            | Error::DegenerateFunction { .. } => EXIT_CONVERGENCE,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Grid(a) => cmd_grid(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("qbasis: {}", f.message);
            f.code
        }
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))
}

fn load_table(path: &Path) -> std::result::Result<CoefficientTable, Failure> {
    let parsed = table_io::parse_table(&read_text(path)?).map_err(|e| {
        Failure::new(EXIT_PARSE, format!("{}: {e}", path.display()))
    })?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed.table)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn cmd_synth(args: &SynthArgs) -> CmdResult {
    let quadrature = QuadratureConfig {
        sample_count: args.quad_points,
        ..QuadratureConfig::default()
    };
    let config = SynthesisConfig {
        n_max: args.n_max,
        newton_tolerance: args.tol,
        max_iterations: args.max_iterations,
        damping_init: args.damping,
        quadrature,
        guess_order: args.guess_order.clone(),
        closed_form_diagnostics: args.closed_form_diagnostics,
        ..SynthesisConfig::default()
    };
    config.validate()?;

    let started = Instant::now();
    let outcome = synthesis::synthesize(&config)?;
    let wall_time = started.elapsed().as_secs_f64();

    let options = EmitOptions {
        include_closed_form: args.include_closed_form,
    };
    write_text(&args.out, &table_io::emit_partial(&outcome.table, &options))?;

    let provenance: serde_json::Map<String, serde_json::Value> = outcome
        .table
        .entries()
        .map(|e| (e.index().to_string(), json!(e.provenance)))
        .collect();
    let failures: Vec<_> = outcome
        .failures
        .iter()
        .map(|f| json!({ "index": f.index, "error": f.error.to_string() }))
        .collect();
    let manifest = json!({
        "command": "synth",
        "config": config,
        "include_closed_form": args.include_closed_form,
        "wall_time_seconds": wall_time,
        "complete": outcome.is_complete(),
        "reports": outcome.reports,
        "failures": failures,
        "blocked": outcome.blocked,
        "provenance": provenance,
    });
    let manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("manifest: {e}")))?;
    write_text(&manifest_path(&args.out), &(manifest_text + "\n"))?;

    if outcome.is_complete() {
        println!(
            "synthesized {} entries up to n = {} in {wall_time:.1} s",
            outcome.table.len(),
            config.n_max
        );
        return Ok(EXIT_OK);
    }
    for f in &outcome.failures {
        eprintln!("failed {}: {}", f.index, f.error);
    }
    if !outcome.blocked.is_empty() {
        let blocked: Vec<String> = outcome.blocked.iter().map(ToString::to_string).collect();
        eprintln!("not attempted: {}", blocked.join(" "));
    }
    Ok(EXIT_CONVERGENCE)
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    let table = load_table(&args.table)?;
    let quadrature = QuadratureConfig {
        sample_count: args.quad_points,
        ..QuadratureConfig::default()
    };
    quadrature.validate()?;
    let tolerances = CheckTolerances {
        gram_off_diagonal: args.tol,
        gram_diagonal: args.diag_tol,
        amplitude: args.amplitude_tol,
        quadrature,
        ..CheckTolerances::default()
    };
    let report = run_checks(&table, &tolerances).map_err(|e| Failure::new(EXIT_VERIFICATION, e.to_string()))?;
    print!("{}", report.render());
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        let names: Vec<String> = report.offenders().iter().map(ToString::to_string).collect();
        eprintln!("verification failed for {}", names.join(" "));
        Ok(EXIT_VERIFICATION)
    }
}

fn cmd_grid(args: &GridArgs) -> CmdResult {
    let selection = table_io::parse_indices(&args.indices)?;
    let table = load_table(&args.table)?;
    let options = GridOptions {
        with_reduced: args.with_reduced,
        with_zernike: args.with_zernike,
    };
    let text = table_io::emit_grid(&table, &selection, args.resolution as usize, &options)?;
    match &args.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn cmd_eval(args: &EvalArgs) -> CmdResult {
    let index = BasisIndex::new(args.n, args.m)?;
    if args.r.is_nan() || !(0.0..=1.0).contains(&args.r) {
        return Err(Failure::new(EXIT_USAGE, format!("radius {} outside [0, 1]", args.r)));
    }
    let table = load_table(&args.table)?;
    let q = q_eval(table.function(index)?, args.r)?;
    println!("{}", table_io::format_value(q));
    if let Some(phi) = args.phi {
        println!("{}", table_io::format_value(azimuthal_eval(index.m(), phi) * q));
    }
    Ok(EXIT_OK)
}
