//! `bds`: evaluate the operators, tabulate moments and run the convergence suites.
//!
//! Exit status: 0 on success, 1 when a check completes but fails, 2 on invalid
//! input (including precondition failures such as a recurrence pole), 3 when a
//! numerical procedure does not converge.

mod commands;
mod config;
mod output;
mod selftest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use bds_core::analysis::Intervals;
use bds_core::{QuadratureConfig, ShapeParams};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{CommandKind, OutputFormat, RunConfig};

pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn internal(err: impl fmt::Display) -> Self {
        CliError {
            code: 1,
            message: format!("internal error: {err}"),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<bds_core::Error> for CliError {
    fn from(e: bds_core::Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser, Debug)]
#[command(name = "bds", version, about = "Baskakov-Durrmeyer-Stancu operator toolkit")]
struct Cli {
    /// Worker threads; 0 means one per logical core. BDS_JOBS takes precedence.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Rerun a saved configuration (a bare config or a full JSON report).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the operator at one or more points.
    Eval(RunArgs),
    /// Evaluate the r-th derivative of the operator.
    Deriv(RunArgs),
    /// Central moment table, exact.
    Moments(RunArgs),
    /// Moments of the discrete basis about x, exact.
    Umoments(RunArgs),
    /// Check the first-order asymptotic formula over an n grid.
    Voronovskaja(RunArgs),
    /// Pointwise simultaneous convergence over an n grid.
    Convergence(RunArgs),
    /// Sup-norm error against the second-order modulus bound.
    Errorbound(RunArgs),
    /// Coefficient polynomials of the basis derivative decomposition.
    Qpoly(RunArgs),
    /// Run the built-in invariant suite.
    Selftest(RunArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Index parameter n, as "p/q" or an integer.
    #[arg(long, default_value = "32", allow_hyphen_values = true)]
    n: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    beta: String,
    /// Registry function id.
    #[arg(long = "f", default_value = "t2")]
    f: String,
    /// Evaluation point, or a comma-separated list for eval and deriv.
    #[arg(long, default_value = "1.0")]
    x: String,
    /// Derivative order; defaults to 1 for deriv and 0 elsewhere.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_m: usize,
    /// Comma-separated n values; defaults to powers of two.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    b1: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_refinements: Option<usize>,
    /// Seed for randomized test points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Eval(a) => (CommandKind::Eval, a),
            Command::Deriv(a) => (CommandKind::Deriv, a),
            Command::Moments(a) => (CommandKind::Moments, a),
            Command::Umoments(a) => (CommandKind::Umoments, a),
            Command::Voronovskaja(a) => (CommandKind::Voronovskaja, a),
            Command::Convergence(a) => (CommandKind::Convergence, a),
            Command::Errorbound(a) => (CommandKind::Errorbound, a),
            Command::Qpoly(a) => (CommandKind::Qpoly, a),
            Command::Selftest(a) => (CommandKind::Selftest, a),
        }
    }
}

fn build_config(kind: CommandKind, a: RunArgs, output: Option<String>) -> Result<RunConfig, CliError> {
    let params = ShapeParams::parse(&a.n, &a.gamma, &a.alpha, &a.beta)?;
    let n_grid = match &a.n_grid {
        Some(text) => config::parse_n_grid(text)?,
        None if kind == CommandKind::Errorbound => config::power_grid(6, 12),
        None if matches!(kind, CommandKind::Voronovskaja | CommandKind::Convergence) => config::power_grid(6, 14),
        None => Vec::new(),
    };
    let intervals = match (a.a, a.b, a.a1, a.b1) {
        (Some(a), Some(b), Some(a1), Some(b1)) => Some(Intervals { a, b, a1, b1 }),
        (None, None, None, None) => None,
        _ => return Err(CliError::validation("--a, --b, --a1 and --b1 go together")),
    };
    let defaults = QuadratureConfig::default();
    let quadrature = QuadratureConfig {
        rel_tol: a.rel_tol.unwrap_or(defaults.rel_tol),
        abs_tol: a.abs_tol.unwrap_or(defaults.abs_tol),
        max_refinements: a.max_refinements.unwrap_or(defaults.max_refinements),
    };
    let r = a.r.unwrap_or(if kind == CommandKind::Deriv { 1 } else { 0 });
    Ok(RunConfig {
        command: kind,
        params,
        n_grid,
        x_grid: config::parse_x_grid(&a.x)?,
        f_id: a.f,
        r,
        max_m: a.max_m,
        intervals,
        output_format: a.format,
        output_path: output,
        quadrature,
        seed: a.seed,
    })
}

/// Reads a config file; a full report is accepted and its `config` entry used.
fn load_config(path: &PathBuf, output: Option<String>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    if let Some(inner) = doc.get_mut("config") {
        doc = inner.take();
    }
    let mut cfg: RunConfig =
        serde_json::from_value(doc).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    if output.is_some() {
        cfg.output_path = output;
    }
    Ok(cfg)
}

/// `BDS_JOBS` wins over `--jobs`; zero or absent means rayon's default.
fn resolve_jobs(flag: Option<usize>, env: Option<String>) -> Result<usize, CliError> {
    match env {
        Some(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::validation(format!("BDS_JOBS must be a non-negative integer, got {v:?}"))),
        _ => Ok(flag.unwrap_or(0)),
    }
}

fn run(cli: Cli) -> Result<Option<CliError>, CliError> {
    let jobs = resolve_jobs(cli.jobs, std::env::var("BDS_JOBS").ok())?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(CliError::internal)?;
    let cfg = match (cli.command, &cli.config) {
        (Some(_), Some(_)) => return Err(CliError::validation("--config cannot be combined with a subcommand")),
        (None, Some(path)) => load_config(path, cli.output)?,
        (Some(cmd), None) => {
            let (kind, args) = cmd.split();
            build_config(kind, args, cli.output)?
        }
        (None, None) => return Err(CliError::validation("a subcommand or --config is required; see --help")),
    };
    let report = commands::execute(&cfg)?;
    output::emit(&cfg, report.result, &report.rows)?;
    if let Some(e) = report.deferred {
        return Ok(Some(e));
    }
    if report.passed == Some(false) {
        return Ok(Some(CliError {
            code: EXIT_CHECK_FAILED,
            message: format!("{} check failed", cfg.command.name()),
        }));
    }
    Ok(None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_flag() {
        assert_eq!(resolve_jobs(Some(4), None), Ok(4));
        assert_eq!(resolve_jobs(Some(4), Some("2".into())), Ok(2));
        assert_eq!(resolve_jobs(None, Some(" ".into())), Ok(0));
        assert_eq!(resolve_jobs(Some(1), Some("many".into())).unwrap_err().code, EXIT_VALIDATION);
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        let pole: CliError = bds_core::Error::RecurrencePole { m: 3 }.into();
        assert_eq!(pole.code, EXIT_VALIDATION);
        let nc: CliError = bds_core::Error::NonConvergence {
            refinements: 3,
            last_change: 1.0,
        }
        .into();
        assert_eq!(nc.code, EXIT_NUMERICAL);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn config_round_trips() {
        let cli = Cli::parse_from(["bds", "errorbound", "--n", "3/2", "--a", "0.1", "--b", "3", "--a1", "0.5", "--b1", "2"]);
        let (kind, args) = cli.command.unwrap().split();
        let cfg = build_config(kind, args, None).unwrap();
        assert_eq!(cfg.n_grid.len(), 7);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
