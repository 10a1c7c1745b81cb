//! Log–log slope fits and extrapolation in `1/n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::moments;
use crate::params::ShapeParams;

/// Magnitudes below this are treated as vanished and dropped from fits.
pub const UNDERFLOW: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    /// Abscissae whose magnitude vanished.
    pub dropped: Vec<f64>,
}

/// Least-squares slope of `ln|v|` against `ln n`.
pub fn log_log_slope(ns: &[f64], values: &[f64]) -> Result<SlopeFit> {
    if ns.len() != values.len() {
        return Err(Error::Parameter("grid and values differ in length".into()));
    }
    let mut dropped = Vec::new();
    let mut pts = Vec::with_capacity(ns.len());
    for (&n, &v) in ns.iter().zip(values) {
        if v.abs() < UNDERFLOW || !v.is_finite() || !(n > 0.0) {
            dropped.push(n);
        } else {
            pts.push((n.ln(), v.abs().ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::Parameter(format!(
            "degenerate fit: {} usable points, {} dropped",
            pts.len(),
            dropped.len()
        )));
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("degenerate fit: all abscissae equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        points_used: pts.len(),
        dropped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// Number of `1/n` correction terms eliminated.
    pub steps: usize,
    /// The same extrapolation using the grid without its last point.
    pub previous: f64,
}

/// Neville evaluation at `h = 0` of the polynomial through `(h_i, v_i)`.
fn neville_at_zero(hs: &[f64], vs: &[f64]) -> f64 {
    let mut p = vs.to_vec();
    let len = hs.len();
    for level in 1..len {
        for i in 0..len - level {
            let (hi, hj) = (hs[i], hs[i + level]);
            p[i] = (hj * p[i] - hi * p[i + 1]) / (hj - hi);
        }
    }
    p[0]
}

/// Extrapolates `v(n) = L + C₁/n + C₂/n² + …` to `n → ∞`.
///
/// One correction term is eliminated first; a second is eliminated when the
/// one-step limits still drift by more than `1e-8·max(|L|, 1)`. Fails with
/// an instability error when the last two extrapolations differ by more than
/// `0.05·max(|L|, 1)`.
pub fn richardson(ns: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if ns.len() != values.len() || ns.len() < 3 {
        return Err(Error::Parameter("extrapolation needs at least three points".into()));
    }
    if ns.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("n grid must be strictly increasing".into()));
    }
    let hs: Vec<f64> = ns.iter().map(|n| 1.0 / n).collect();
    let at = |steps: usize, end: usize| neville_at_zero(&hs[end - steps..=end], &values[end - steps..=end]);
    let last = ns.len() - 1;

    let one = (at(1, last), at(1, last - 1));
    let scale = one.0.abs().max(1.0);
    let steps = if (one.0 - one.1).abs() > 1e-8 * scale && ns.len() >= 4 { 2 } else { 1 };
    let (limit, previous) = if steps == 2 { (at(2, last), at(2, last - 1)) } else { one };
    if !limit.is_finite() || (limit - previous).abs() > 0.05 * limit.abs().max(1.0) {
        return Err(Error::Instability(format!(
            "extrapolated limits {previous} and {limit} disagree"
        )));
    }
    Ok(Extrapolation { limit, steps, previous })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    /// `μ_m(x)`, the operator's central moments.
    Central,
    /// `U_m(x)`, the moments of the discrete basis about `x`.
    Basis,
}

/// Slope of `ln|moment_m(x)|` against `ln n` over `n_grid`, computed from
/// exact tables; `γ, α, β` are taken from `params`.
pub fn moment_order_fit(
    params: &ShapeParams,
    kind: MomentKind,
    m: usize,
    x: &Rational,
    n_grid: &[Rational],
) -> Result<SlopeFit> {
    let values = n_grid
        .par_iter()
        .map(|n| {
            let p = params.with_n(n.clone())?;
            let poly = match kind {
                MomentKind::Central => central_entry(&p, m)?,
                MomentKind::Basis => moments::baskakov_u_moments(p.n(), p.gamma(), m)?.swap_remove(m),
            };
            Ok(exact::to_f64(&poly.eval(x)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let ns: Vec<f64> = n_grid.iter().map(exact::to_f64).collect();
    log_log_slope(&ns, &values)
}

fn central_entry(p: &ShapeParams, m: usize) -> Result<crate::poly::RationalPoly> {
    let table = moments::central_moments(p, m);
    table.get(m).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn slope_of_power_law() {
        let ns = [8.0, 16.0, 32.0, 64.0];
        let vs: Vec<f64> = ns.iter().map(|n: &f64| 3.0 * n.powf(-1.5)).collect();
        let fit = log_log_slope(&ns, &vs).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn vanished_points_are_dropped() {
        let fit = log_log_slope(&[1.0, 2.0, 4.0], &[0.0, 0.5, 0.25]).unwrap();
        assert_eq!(fit.dropped, vec![1.0]);
        assert_eq!(fit.points_used, 2);
        assert!(log_log_slope(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn richardson_removes_one_and_two_terms() {
        let ns: Vec<f64> = (4..10).map(|e| 2f64.powi(e)).collect();
        let v1: Vec<f64> = ns.iter().map(|n| 4.0 - 8.0 / n).collect();
        let e = richardson(&ns, &v1).unwrap();
        assert_eq!(e.steps, 1);
        assert!((e.limit - 4.0).abs() < 1e-12);
        let v2: Vec<f64> = ns.iter().map(|n| 4.0 - 8.0 / n + 30.0 / (n * n)).collect();
        let e = richardson(&ns, &v2).unwrap();
        assert_eq!(e.steps, 2);
        assert!((e.limit - 4.0).abs() < 1e-10);
    }

    #[test]
    fn richardson_flags_non_cauchy_sequences() {
        let ns = [8.0, 16.0, 32.0, 64.0];
        let vs = [1.0, -5.0, 9.0, -20.0];
        assert!(matches!(richardson(&ns, &vs), Err(Error::Instability(_))));
        assert!(richardson(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn second_moment_order() {
        let p = ShapeParams::from_ints(64, 1, 1, 1, 2).unwrap();
        let grid: Vec<Rational> = (6..=10).map(|e| int(1 << e)).collect();
        let fit = moment_order_fit(&p, MomentKind::Central, 2, &int(1), &grid).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05);
        let fit = moment_order_fit(&p, MomentKind::Basis, 3, &rat(1, 1), &grid).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.05);
        // μ_1 = (α - βx)/(n + β): slope → -1
        let fit = moment_order_fit(&p, MomentKind::Central, 1, &int(1), &grid).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05);
    }
}
