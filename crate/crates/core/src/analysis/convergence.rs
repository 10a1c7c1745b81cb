//! Empirical convergence suites for `(B_n)^{(r)} f → f^{(r)}`.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{self, log_log_slope};
use super::modulus::{modulus_of_continuity, ModulusQuery};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::functions::FunctionSpec;
use crate::moments;
use crate::operator;
use crate::params::ShapeParams;
use crate::poly::RationalPoly;
use crate::quadrature::QuadratureConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub param_grid: Vec<f64>,
    /// `(B_n)^{(r)}(f, x)` per grid point.
    pub values: Vec<f64>,
    pub observed: Vec<f64>,
    /// Log–log slope of the observed errors (or residuals) in `n`.
    pub fitted_rate: Option<f64>,
    pub extrapolated_limit: f64,
    pub extrapolation_steps: usize,
    pub target: f64,
    pub rel_deviation: f64,
    pub passed: bool,
}

impl ConvergenceReport {
    /// True when the limit is within `rel_tol` relative or `abs_tol` absolute of the target.
    pub fn agrees(&self, rel_tol: f64, abs_tol: f64) -> bool {
        self.rel_deviation <= rel_tol || (self.extrapolated_limit - self.target).abs() <= abs_tol
    }
}

fn rel_deviation(limit: f64, target: f64) -> f64 {
    (limit - target).abs() / target.abs().max(1e-12)
}

/// `f^{(r)}` coefficient, `f^{(r+1)}` coefficient, `f^{(r+2)}` coefficient.
type Coefficients = (f64, f64, f64);

fn combine(f: &FunctionSpec, r: usize, x: f64, c: Coefficients) -> Result<f64> {
    if r + 2 > f.max_order() {
        return Err(Error::Order {
            requested: r + 2,
            available: f.max_order(),
        });
    }
    Ok(c.0 * f.derivative(r, x)? + c.1 * f.derivative(r + 1, x)? + c.2 * f.derivative(r + 2, x)?)
}

/// `r(γ(r-1) - β) f^{(r)}(x) + {rγ(1+2x) + α - βx} f^{(r+1)}(x) + x(1+γx) f^{(r+2)}(x)`.
///
/// This is the classical closed form of the limit. It coincides with
/// [`voronovskaja_limit`] when `γ = 1` or `r = 0`.
pub fn voronovskaja_rhs(params: &ShapeParams, f: &FunctionSpec, r: usize, x: f64) -> Result<f64> {
    let (g, a, b, rf) = (params.gamma_f64(), params.alpha_f64(), params.beta_f64(), r as f64);
    combine(
        f,
        r,
        x,
        (rf * (g * (rf - 1.0) - b), rf * g * (1.0 + 2.0 * x) + a - b * x, x * (1.0 + g * x)),
    )
}

/// `lim n{(B_n)^{(r)}(f, x) - f^{(r)}(x)}` as it follows from the moments:
/// the `f^{(r+1)}` coefficient is `r(1+2γx) + α - βx`.
pub fn voronovskaja_limit(params: &ShapeParams, f: &FunctionSpec, r: usize, x: f64) -> Result<f64> {
    let (g, a, b, rf) = (params.gamma_f64(), params.alpha_f64(), params.beta_f64(), r as f64);
    combine(
        f,
        r,
        x,
        (rf * (g * (rf - 1.0) - b), rf * (1.0 + 2.0 * g * x) + a - b * x, x * (1.0 + g * x)),
    )
}

/// `(B_n)^{(r)}` applied to the polynomial `Σ c_m t^m`, exactly.
pub fn polynomial_image(params: &ShapeParams, coeffs: &[Rational], r: usize) -> Result<RationalPoly> {
    if coeffs.is_empty() {
        return Ok(RationalPoly::zero());
    }
    let raw = moments::raw_moments(params, coeffs.len() - 1)?;
    let mut image = coeffs
        .iter()
        .zip(&raw)
        .fold(RationalPoly::zero(), |acc, (c, m)| &acc + &m.scale(c));
    for _ in 0..r {
        image = image.derivative();
    }
    Ok(image)
}

/// `n{(B_n)^{(r)}(f, x) - f^{(r)}(x)}` for a polynomial `f`, exactly.
pub fn exact_voronovskaja_term(params: &ShapeParams, coeffs: &[Rational], r: usize, x: &Rational) -> Result<Rational> {
    let image = polynomial_image(params, coeffs, r)?;
    let mut f = RationalPoly::new(coeffs.to_vec());
    for _ in 0..r {
        f = f.derivative();
    }
    Ok(params.n() * (image.eval(x) - f.eval(x)))
}

fn validate_grid(n_grid: &[Rational]) -> Result<Vec<f64>> {
    if n_grid.len() < 3 {
        return Err(Error::Parameter("n grid needs at least three values".into()));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("n grid must be strictly increasing".into()));
    }
    Ok(n_grid.iter().map(exact::to_f64).collect())
}

/// `(B_n)^{(r)}(f, x)` for every `n` in the grid, fanned out over `n`.
fn derivative_sequence(
    base: &ShapeParams,
    n_grid: &[Rational],
    f: &FunctionSpec,
    r: usize,
    xs: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<Vec<f64>>> {
    n_grid
        .par_iter()
        .map(|n| {
            let p = base.with_n(n.clone())?;
            let res = operator::apply_derivative_grid(&p, f, r, xs, cfg)?;
            Ok(res.into_iter().map(|o| o.value).collect())
        })
        .collect()
}

/// Extrapolates `n{(B_n)^{(r)}(f, x) - f^{(r)}(x)}` over `n_grid` and
/// compares with [`voronovskaja_rhs`] for the grid's `γ, α, β`.
///
/// `passed` is true when the deviation is under 1% relative or 0.05 absolute.
pub fn voronovskaja_check(
    base: &ShapeParams,
    n_grid: &[Rational],
    f: &FunctionSpec,
    r: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    let ns = validate_grid(n_grid)?;
    let target = voronovskaja_rhs(base, f, r, x)?;
    let fx = f.derivative(r, x)?;
    let values: Vec<f64> = derivative_sequence(base, n_grid, f, r, &[x], cfg)?
        .into_iter()
        .map(|v| v[0])
        .collect();
    let observed: Vec<f64> = values.iter().zip(&ns).map(|(v, n)| n * (v - fx)).collect();
    let ext = fit::richardson(&ns, &observed)?;
    let residuals: Vec<f64> = observed.iter().map(|v| v - ext.limit).collect();
    let fitted_rate = log_log_slope(&ns, &residuals).ok().map(|s| s.slope);
    let mut report = ConvergenceReport {
        param_grid: ns,
        values,
        observed,
        fitted_rate,
        extrapolated_limit: ext.limit,
        extrapolation_steps: ext.steps,
        target,
        rel_deviation: rel_deviation(ext.limit, target),
        passed: false,
    };
    report.passed = report.agrees(0.01, 0.05);
    Ok(report)
}

/// Errors `e_n = |(B_n)^{(r)}(f, x) - f^{(r)}(x)|` over `n_grid`.
///
/// Passes when the errors do not increase over the last three grid points
/// (values under `1e-12·(1 + |f^{(r)}(x)|)` count as converged) and the last
/// error is below `1e-2·(1 + |f^{(r)}(x)|)`.
pub fn pointwise_convergence_check(
    base: &ShapeParams,
    n_grid: &[Rational],
    f: &FunctionSpec,
    r: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    let ns = validate_grid(n_grid)?;
    let target = f.derivative(r, x)?;
    let values: Vec<f64> = derivative_sequence(base, n_grid, f, r, &[x], cfg)?
        .into_iter()
        .map(|v| v[0])
        .collect();
    let observed: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
    let floor = 1e-12 * (1.0 + target.abs());
    let clipped: Vec<f64> = observed.iter().map(|&e| if e < floor { 0.0 } else { e }).collect();
    let fitted_rate = log_log_slope(&ns, &clipped).ok().map(|s| s.slope);
    let tail = &clipped[clipped.len() - 3..];
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let small = *observed.last().expect("nonempty grid") < 1e-2 * (1.0 + target.abs());
    let ext = fit::richardson(&ns, &values)?;
    Ok(ConvergenceReport {
        param_grid: ns,
        values,
        observed,
        fitted_rate,
        extrapolated_limit: ext.limit,
        extrapolation_steps: ext.steps,
        target,
        rel_deviation: rel_deviation(ext.limit, target),
        passed: decreasing && small,
    })
}

/// `(a, b, a1, b1)` with `0 < a < a1 < b1 < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intervals {
    pub a: f64,
    pub b: f64,
    pub a1: f64,
    pub b1: f64,
}

impl Intervals {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.a && self.a < self.a1 && self.a1 < self.b1 && self.b1 < self.b && self.b.is_finite();
        if !ok {
            return Err(Error::Parameter(format!(
                "need 0 < a < a1 < b1 < b, got ({}, {}, {}, {})",
                self.a, self.b, self.a1, self.b1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundRow {
    pub n: f64,
    /// `max_{[a1,b1]} |(B_n)^{(r)} f - f^{(r)}|` on a 64-point grid.
    pub lhs: f64,
    /// `ω₂(f^{(r)}, n^{-1/2}, [a1, b1]) + ‖f‖_μ / n`.
    pub rhs: f64,
    pub ratio: f64,
    /// As `rhs` with the modulus taken over `[a, b]`.
    pub rhs_outer: f64,
    pub ratio_outer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub rows: Vec<ErrorBoundRow>,
    pub growth_norm: f64,
    pub median_ratio: f64,
    /// Last ratio at most twice the median ratio (inner interval).
    pub passed: bool,
}

const BOUND_GRID: usize = 64;

/// Ratio of the observed sup error to the modulus-based bound, per `n`.
pub fn error_bound_ratio(
    base: &ShapeParams,
    n_grid: &[Rational],
    f: &FunctionSpec,
    r: usize,
    intervals: Intervals,
    cfg: &QuadratureConfig,
) -> Result<ErrorBoundReport> {
    intervals.validate()?;
    let ns = validate_grid(n_grid)?;
    let fr = f.derived(r)?;
    let xs: Vec<f64> = (0..BOUND_GRID)
        .map(|i| intervals.a1 + (intervals.b1 - intervals.a1) * i as f64 / (BOUND_GRID - 1) as f64)
        .collect();
    let values = derivative_sequence(base, n_grid, f, r, &xs, cfg)?;
    let growth_norm = f.growth_norm();
    let rows = ns
        .par_iter()
        .zip(values)
        .map(|(&n, vals)| {
            let lhs = xs
                .iter()
                .zip(&vals)
                .map(|(&x, v)| (v - fr.evaluate(x)).abs())
                .fold(0.0, f64::max);
            let delta = n.powf(-0.5);
            let omega = |a: f64, b: f64| -> Result<f64> {
                modulus_of_continuity(&ModulusQuery::new(fr.clone(), 2, delta, a, b)?, 64)
            };
            let rhs = omega(intervals.a1, intervals.b1)? + growth_norm / n;
            let rhs_outer = omega(intervals.a, intervals.b)? + growth_norm / n;
            Ok(ErrorBoundRow {
                n,
                lhs,
                rhs,
                ratio: lhs / rhs,
                rhs_outer,
                ratio_outer: lhs / rhs_outer,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median_ratio = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    let last = rows.last().expect("nonempty grid").ratio;
    Ok(ErrorBoundReport {
        passed: last <= 2.0 * median_ratio,
        rows,
        growth_norm,
        median_ratio,
    })
}

/// True when the exact term is identically zero in `n`, e.g. for affine `f`.
pub fn is_exactly_reproduced(params: &ShapeParams, coeffs: &[Rational], r: usize, x: &Rational) -> Result<bool> {
    Ok(exact_voronovskaja_term(params, coeffs, r, x)?.is_zero())
}
