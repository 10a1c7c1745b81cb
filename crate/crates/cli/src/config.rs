//! Run configuration: everything needed to reproduce a report.

use bds_core::analysis::Intervals;
use bds_core::exact::{self, Rational};
use bds_core::functions;
use bds_core::{QuadratureConfig, ShapeParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Eval,
    Deriv,
    Moments,
    Umoments,
    Voronovskaja,
    Convergence,
    Errorbound,
    Qpoly,
    Selftest,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Eval => "eval",
            CommandKind::Deriv => "deriv",
            CommandKind::Moments => "moments",
            CommandKind::Umoments => "umoments",
            CommandKind::Voronovskaja => "voronovskaja",
            CommandKind::Convergence => "convergence",
            CommandKind::Errorbound => "errorbound",
            CommandKind::Qpoly => "qpoly",
            CommandKind::Selftest => "selftest",
        }
    }

    fn uses_function(self) -> bool {
        matches!(
            self,
            CommandKind::Eval
                | CommandKind::Deriv
                | CommandKind::Voronovskaja
                | CommandKind::Convergence
                | CommandKind::Errorbound
        )
    }

    fn uses_grid(self) -> bool {
        matches!(self, CommandKind::Voronovskaja | CommandKind::Convergence | CommandKind::Errorbound)
    }

    pub fn supports_csv(self) -> bool {
        self.uses_function()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: ShapeParams,
    /// Exact `n` values, as `"p/q"` strings.
    pub n_grid: Vec<String>,
    pub x_grid: Vec<f64>,
    pub f_id: String,
    pub r: usize,
    pub max_m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Intervals>,
    pub output_format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn n_values(&self) -> Result<Vec<Rational>, CliError> {
        self.n_grid
            .iter()
            .map(|s| exact::parse_rational(s).map_err(CliError::from))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.command;
        if kind.uses_function() {
            functions::registry(&self.f_id)?;
            if self.x_grid.is_empty() {
                return Err(CliError::validation("at least one x is required"));
            }
            if let Some(x) = self.x_grid.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                return Err(CliError::validation(format!("x must be finite and ≥ 0, got {x}")));
            }
        }
        if kind.uses_grid() {
            let ns = self.n_values()?;
            if ns.is_empty() {
                return Err(CliError::validation("n grid must not be empty"));
            }
            if ns.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::validation("n grid must be strictly increasing"));
            }
            if kind != CommandKind::Errorbound && self.x_grid.len() != 1 {
                return Err(CliError::validation(format!("{} takes a single x", kind.name())));
            }
        }
        if kind == CommandKind::Errorbound {
            self.intervals
                .ok_or_else(|| CliError::validation("errorbound needs --a, --b, --a1, --b1"))?
                .validate()?;
        }
        if self.output_format == OutputFormat::Csv && !kind.supports_csv() {
            return Err(CliError::validation(format!(
                "csv output is not available for {}; use json",
                kind.name()
            )));
        }
        self.quadrature.validate()?;
        Ok(())
    }
}

/// Parses a comma-separated list of `n` values and normalizes each to `"p/q"`.
pub fn parse_n_grid(text: &str) -> Result<Vec<String>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Ok(exact::format_rational(&exact::parse_rational(s)?)))
        .collect()
}

pub fn parse_x_grid(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::validation(format!("not a number: {s:?}")))
        })
        .collect()
}

/// `2^lo, …, 2^hi` as strings.
pub fn power_grid(lo: u32, hi: u32) -> Vec<String> {
    (lo..=hi).map(|e| (1u64 << e).to_string()).collect()
}
