//! Command execution: each command yields a JSON result and optional CSV rows.

use bds_core::analysis::{self, ConvergenceReport, ErrorBoundReport};
use bds_core::basis;
use bds_core::exact::{self, Rational};
use bds_core::functions::{self, FunctionSpec};
use bds_core::moments;
use bds_core::operator;
use bds_core::{OperatorResult, RationalPoly, ShapeParams};
use serde_json::{json, Value};

use crate::config::{CommandKind, RunConfig};
use crate::output::CsvRow;
use crate::selftest;
use crate::CliError;

pub struct Report {
    pub result: Value,
    pub rows: Vec<CsvRow>,
    /// `Some(false)` when a check ran to completion but did not pass.
    pub passed: Option<bool>,
    /// Error to report after writing the (partial) result.
    pub deferred: Option<CliError>,
}

impl Report {
    fn plain(result: Value) -> Self {
        Report {
            result,
            rows: Vec::new(),
            passed: None,
            deferred: None,
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match cfg.command {
        CommandKind::Eval => evaluate(cfg, 0),
        CommandKind::Deriv => evaluate(cfg, cfg.r),
        CommandKind::Moments => central(cfg),
        CommandKind::Umoments => basis_moments(cfg),
        CommandKind::Voronovskaja => voronovskaja(cfg),
        CommandKind::Convergence => convergence(cfg),
        CommandKind::Errorbound => error_bound(cfg),
        CommandKind::Qpoly => qpoly(cfg),
        CommandKind::Selftest => Ok(selftest::run(cfg.seed)),
    }
}

/// Monomial degree for registry ids with an exact image under the operator.
fn monomial_degree(id: &str) -> Option<usize> {
    match id {
        "one" => Some(0),
        "t" => Some(1),
        _ => id.strip_prefix('t')?.parse().ok(),
    }
}

/// Exact `(B_n)^{(r)}` image of a registry monomial, when it exists.
fn exact_image(params: &ShapeParams, id: &str, r: usize) -> Option<RationalPoly> {
    let m = monomial_degree(id)?;
    let mut coeffs = vec![Rational::from_integer(0.into()); m + 1];
    coeffs[m] = Rational::from_integer(1.into());
    analysis::polynomial_image(params, &coeffs, r).ok()
}

fn point_json(x: f64, res: &OperatorResult, target: Option<f64>) -> Value {
    json!({
        "x": x,
        "value": res.value,
        "target": target,
        "truncation_k": res.truncation_k,
        "tail_bound": res.tail_bound,
        "atom_weight": res.atom_weight,
        "kernel_mass": res.kernel_mass,
    })
}

fn evaluate(cfg: &RunConfig, r: usize) -> Result<Report, CliError> {
    let f = functions::registry(&cfg.f_id)?;
    let results = operator::apply_derivative_grid(&cfg.params, &f, r, &cfg.x_grid, &cfg.quadrature)?;
    let image = exact_image(&cfg.params, &cfg.f_id, r);
    let n = cfg.params.n_f64();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for (&x, res) in cfg.x_grid.iter().zip(&results) {
        let target = image.as_ref().map(|p| p.eval_f64(x));
        points.push(point_json(x, res, target));
        rows.push(CsvRow::compare(n, Some(x), res.value, target, None));
    }
    let mut result = json!({ "points": points });
    if let Some(p) = image {
        result["exact_image"] = json!(p.to_strings());
    }
    Ok(Report {
        result,
        rows,
        passed: None,
        deferred: None,
    })
}

fn central(cfg: &RunConfig) -> Result<Report, CliError> {
    let table = moments::central_moments(&cfg.params, cfg.max_m);
    let display: Vec<String> = table.central.iter().map(|p| p.to_string()).collect();
    let mut result = json!({ "table": serde_json::to_value(&table).map_err(CliError::internal)?, "display": display });
    // Raw moments exist only below n/γ + 1; report them when they do.
    if let Ok(raw) = moments::raw_moments(&cfg.params, table.computed_order()) {
        let raw: Vec<Vec<String>> = raw.iter().map(|p| p.to_strings()).collect();
        result["raw"] = json!(raw);
    }
    let deferred = table.require_complete().err().map(CliError::from);
    Ok(Report {
        deferred,
        ..Report::plain(result)
    })
}

fn basis_moments(cfg: &RunConfig) -> Result<Report, CliError> {
    let u = moments::baskakov_u_moments(cfg.params.n(), cfg.params.gamma(), cfg.max_m)?;
    let coeffs: Vec<Vec<String>> = u.iter().map(|p| p.to_strings()).collect();
    let display: Vec<String> = u.iter().map(|p| p.to_string()).collect();
    Ok(Report::plain(json!({
        "n": exact::format_rational(cfg.params.n()),
        "gamma": exact::format_rational(cfg.params.gamma()),
        "u": coeffs,
        "display": display,
    })))
}

/// `ln(v_i / v_{i-1}) / ln(n_i / n_{i-1})`, empty where undefined.
fn local_rates(ns: &[f64], vs: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for i in 1..ns.len() {
        let (a, b) = (vs[i - 1].abs(), vs[i].abs());
        let rate = (a > 0.0 && b > 0.0).then(|| (b / a).ln() / (ns[i] / ns[i - 1]).ln());
        out.push(rate);
    }
    out
}

fn convergence_rows(rep: &ConvergenceReport, x: f64, values: &[f64], targets: &[f64], errs: &[f64]) -> Vec<CsvRow> {
    let rates = local_rates(&rep.param_grid, errs);
    rep.param_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| CsvRow::compare(n, Some(x), values[i], Some(targets[i]), rates[i]))
        .collect()
}

fn voronovskaja(cfg: &RunConfig) -> Result<Report, CliError> {
    let f = functions::registry(&cfg.f_id)?;
    let x = cfg.x_grid[0];
    let grid = cfg.n_values()?;
    let rep = analysis::voronovskaja_check(&cfg.params, &grid, &f, cfg.r, x, &cfg.quadrature)?;
    let moment_limit = analysis::voronovskaja_limit(&cfg.params, &f, cfg.r, x)?;
    let targets = vec![rep.target; rep.observed.len()];
    let residuals: Vec<f64> = rep.observed.iter().map(|v| v - rep.target).collect();
    let rows = convergence_rows(&rep, x, &rep.observed, &targets, &residuals);
    let mut result = serde_json::to_value(&rep).map_err(CliError::internal)?;
    result["x"] = json!(x);
    result["moment_limit"] = json!(moment_limit);
    Ok(Report {
        passed: Some(rep.passed),
        rows,
        ..Report::plain(result)
    })
}

fn convergence(cfg: &RunConfig) -> Result<Report, CliError> {
    let f = functions::registry(&cfg.f_id)?;
    let x = cfg.x_grid[0];
    let grid = cfg.n_values()?;
    let rep = analysis::pointwise_convergence_check(&cfg.params, &grid, &f, cfg.r, x, &cfg.quadrature)?;
    let targets = vec![rep.target; rep.values.len()];
    let rows = convergence_rows(&rep, x, &rep.values, &targets, &rep.observed);
    let mut result = serde_json::to_value(&rep).map_err(CliError::internal)?;
    result["x"] = json!(x);
    Ok(Report {
        passed: Some(rep.passed),
        rows,
        ..Report::plain(result)
    })
}

fn error_bound(cfg: &RunConfig) -> Result<Report, CliError> {
    let f: FunctionSpec = functions::registry(&cfg.f_id)?;
    let grid = cfg.n_values()?;
    let iv = cfg.intervals.expect("validated");
    let rep: ErrorBoundReport = analysis::error_bound_ratio(&cfg.params, &grid, &f, cfg.r, iv, &cfg.quadrature)?;
    let ns: Vec<f64> = rep.rows.iter().map(|r| r.n).collect();
    let lhs: Vec<f64> = rep.rows.iter().map(|r| r.lhs).collect();
    let rates = local_rates(&ns, &lhs);
    let rows = rep
        .rows
        .iter()
        .zip(rates)
        .map(|(r, rate)| CsvRow::compare(r.n, None, r.lhs, Some(r.rhs), rate))
        .collect();
    Ok(Report {
        passed: Some(rep.passed),
        rows,
        ..Report::plain(serde_json::to_value(&rep).map_err(CliError::internal)?)
    })
}

fn qpoly(cfg: &RunConfig) -> Result<Report, CliError> {
    let gamma = cfg.params.gamma();
    let s = basis::s_polynomials(cfg.r, gamma);
    let table = basis::q_decomposition(&s, cfg.r)?;
    let entries: Vec<Value> = table
        .iter()
        .map(|(&(i, j), q)| json!({ "i": i, "j": j, "coefficients": q.to_strings(), "display": q.to_string() }))
        .collect();
    Ok(Report::plain(json!({
        "r": cfg.r,
        "gamma": exact::format_rational(gamma),
        "q": entries,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_ids() {
        assert_eq!(monomial_degree("one"), Some(0));
        assert_eq!(monomial_degree("t"), Some(1));
        assert_eq!(monomial_degree("t7"), Some(7));
        assert_eq!(monomial_degree("sin"), None);
        assert_eq!(monomial_degree("exp_neg"), None);
    }

    #[test]
    fn local_rate_of_power_law() {
        let r = local_rates(&[2.0, 4.0, 8.0], &[1.0, 0.25, 0.0625]);
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(local_rates(&[1.0, 2.0], &[0.0, 1.0])[1], None);
    }
}
