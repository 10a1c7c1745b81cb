//! Evaluation of `B_{n,γ}^{α,β}(f, x)` and of its derivatives.
//!
//! ```text
//! B(f, x) = Σ_{k≥1} p_{n,k,γ}(x) ∫₀^∞ b_{n,k,γ}(t) f((nt+α)/(n+β)) dt + p_{n,0,γ}(x) f(α/(n+β))
//!
//! B^{(r)}(f, x) = (n/(n+β))^r Γ(n/γ+r) Γ(n/γ-r+1) / (Γ(n/γ+1) Γ(n/γ))
//!                 · Σ_{k≥0} p_{n+γr,k,γ}(x) ∫₀^∞ b_{n-γr,k+r,γ}(t) f^{(r)}((nt+α)/(n+β)) dt
//! ```
//!
//! The integrals do not depend on `x`, so the grid entry points compute each
//! needed `∫ b_k g` once and reuse it across every `x` in the batch.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisWindow, TAIL_TOLERANCE};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::functions::FunctionSpec;
use crate::params::ShapeParams;
use crate::quadrature::{self, QuadratureConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    pub value: f64,
    /// Largest series index included.
    pub truncation_k: u64,
    /// Bound on the omitted basis mass.
    pub tail_bound: f64,
    /// `p_{n,0,γ}(x)`, the Dirac atom's weight; 0 for derivatives, which carry no atom.
    pub atom_weight: f64,
    /// Atom weight plus the included basis weights.
    pub kernel_mass: f64,
}

/// `(n t + α) / (n + β)`.
pub fn stancu_map(params: &ShapeParams, t: f64) -> f64 {
    let n = params.n_f64();
    (n * t + params.alpha_f64()) / (n + params.beta_f64())
}

/// `B_{n,γ}^{α,β}(f, x)`.
pub fn apply(params: &ShapeParams, f: &FunctionSpec, x: f64, cfg: &QuadratureConfig) -> Result<OperatorResult> {
    Ok(apply_grid(params, f, &[x], cfg)?.remove(0))
}

/// [`apply`] at many points, sharing the `x`-independent integrals.
pub fn apply_grid(
    params: &ShapeParams,
    f: &FunctionSpec,
    xs: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<OperatorResult>> {
    cfg.validate()?;
    let shape = params.shape_f64();
    let limit = shape + 1.0;
    if !(f.growth_mu() < limit) {
        return Err(Error::Integrability {
            mu: f.growth_mu(),
            limit,
        });
    }
    let windows = windows_for(params, xs)?;
    let g = |t: f64| f.evaluate(stancu_map(params, t));
    let integrals = SeriesIntegrals::compute(&windows, 1, |k| {
        quadrature::integrate_b_weighted(params, k, &g, f.growth_mu(), cfg).map(|e| e.value)
    })?;

    let atom_value = f.evaluate(stancu_map(params, 0.0));
    let gamma = params.gamma_f64();
    Ok(xs
        .iter()
        .zip(&windows)
        .map(|(&x, w)| {
            let atom_weight = (-shape * (gamma * x).ln_1p()).exp();
            let mut series = 0.0;
            let mut mass = atom_weight;
            for (k, p) in w.iter().filter(|&(k, _)| k >= 1) {
                series += p * integrals.get(k);
                mass += p;
            }
            OperatorResult {
                value: series + atom_weight * atom_value,
                truncation_k: w.k_hi(),
                tail_bound: w.tail_bound,
                atom_weight,
                kernel_mass: mass,
            }
        })
        .collect())
}

/// `n^r Γ(n/γ+r) Γ(n/γ-r+1) / ((n+β)^r Γ(n/γ+1) Γ(n/γ))`, exactly.
///
/// The Gamma ratios are finite products: `Γ(c+r)/Γ(c)` is a rising
/// factorial and `Γ(c+1)/Γ(c-r+1)` a falling one.
pub fn derivative_prefactor_exact(params: &ShapeParams, r: usize) -> Result<Rational> {
    let c = params.shape();
    let falling = exact::falling(&c, r);
    if falling.is_zero() || c <= Rational::from_integer((r as i64 - 1).into()) {
        return Err(Error::Parameter(format!("prefactor needs n/γ > r - 1 (r = {r})")));
    }
    let ratio = params.n() / (params.n() + params.beta());
    Ok(exact::pow(&ratio, r) * exact::rising(&c, r) / falling)
}

pub fn derivative_prefactor(params: &ShapeParams, r: usize) -> Result<f64> {
    derivative_prefactor_exact(params, r).map(|v| exact::to_f64(&v))
}

/// `(B_{n,γ}^{α,β})^{(r)}(f, x)` via the shifted-basis formula.
pub fn apply_derivative(
    params: &ShapeParams,
    f: &FunctionSpec,
    r: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<OperatorResult> {
    Ok(apply_derivative_grid(params, f, r, &[x], cfg)?.remove(0))
}

/// [`apply_derivative`] at many points, sharing the integrals.
///
/// `f^{(r)}` is taken to grow like `(1+t)^{max(μ-r, 0)}` when shaping the
/// quadrature support.
pub fn apply_derivative_grid(
    params: &ShapeParams,
    f: &FunctionSpec,
    r: usize,
    xs: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<OperatorResult>> {
    if r == 0 {
        return apply_grid(params, f, xs, cfg);
    }
    cfg.validate()?;
    if r > f.max_order() {
        return Err(Error::Order {
            requested: r,
            available: f.max_order(),
        });
    }
    let gamma_r = params.gamma() * Rational::from_integer(r.into());
    if params.n() <= &gamma_r {
        return Err(Error::Parameter(format!("need n > γr (r = {r}), got {params}")));
    }
    let n = params.n_f64();
    if !(n > f.growth_mu() + exact::to_f64(&gamma_r)) {
        return Err(Error::Parameter(format!(
            "need n > μ + γr, got n = {n}, μ = {}, γr = {}",
            f.growth_mu(),
            exact::to_f64(&gamma_r)
        )));
    }
    let plus = params.shifted(r as i64)?;
    let minus = params.shifted(-(r as i64))?;
    let prefactor = derivative_prefactor(params, r)?;
    let growth = (f.growth_mu() - r as f64).max(0.0);

    let windows = windows_for(&plus, xs)?;
    let g = |t: f64| f.derivative_unchecked(r, stancu_map(params, t));
    let integrals = SeriesIntegrals::compute(&windows, 0, |k| {
        quadrature::integrate_b_weighted(&minus, k + r as u64, &g, growth, cfg).map(|e| e.value)
    })?;

    Ok(windows
        .iter()
        .map(|w| {
            let series: f64 = w.iter().map(|(k, p)| p * integrals.get(k)).sum();
            OperatorResult {
                value: prefactor * series,
                truncation_k: w.k_hi(),
                tail_bound: w.tail_bound,
                atom_weight: 0.0,
                kernel_mass: w.mass(),
            }
        })
        .collect())
}

fn windows_for(params: &ShapeParams, xs: &[f64]) -> Result<Vec<BasisWindow>> {
    xs.iter()
        .map(|&x| {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::Domain(format!("operator needs finite x ≥ 0, got {x}")));
            }
            basis::basis_window(params, x, TAIL_TOLERANCE)
        })
        .collect()
}

/// Integrals indexed by series position, computed once per distinct `k`.
struct SeriesIntegrals {
    ks: Vec<u64>,
    values: Vec<f64>,
}

impl SeriesIntegrals {
    fn compute(
        windows: &[BasisWindow],
        min_k: u64,
        integral: impl Fn(u64) -> Result<f64> + Sync,
    ) -> Result<Self> {
        let needed: BTreeSet<u64> = windows
            .iter()
            .flat_map(|w| w.k_lo.max(min_k)..=w.k_hi())
            .collect();
        let ks: Vec<u64> = needed.into_iter().collect();
        let values = ks.par_iter().map(|&k| integral(k)).collect::<Result<Vec<_>>>()?;
        Ok(SeriesIntegrals { ks, values })
    }

    fn get(&self, k: u64) -> f64 {
        let i = self.ks.binary_search(&k).expect("integral computed for every window index");
        self.values[i]
    }
}

/// `B(1, x) = 1` exactly; exposed for the zero-order derivative check.
pub fn constant_reproduction() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::functions::registry;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn stancu_examples() {
        let p = ShapeParams::from_ints(10, 1, 1, 1, 2).unwrap();
        assert!((stancu_map(&p, 0.0) - 1.0 / 12.0).abs() < 1e-15);
        assert!((stancu_map(&p, 1.0) - 11.0 / 12.0).abs() < 1e-15);
        let q = ShapeParams::from_ints(10, 1, 1, 0, 0).unwrap();
        assert_eq!(stancu_map(&q, 0.37), 0.37);
    }

    #[test]
    fn constants_are_reproduced() {
        let one = registry("one").unwrap();
        for &(n, gn, gd) in &[(8, 1, 2), (32, 1, 1), (8, 2, 1)] {
            let p = ShapeParams::from_ints(n, gn, gd, 1, 2).unwrap();
            for &x in &[0.0, 0.3, 4.0] {
                let r = apply(&p, &one, x, &cfg()).unwrap();
                assert!((r.value - 1.0).abs() < 1e-12, "{p} x={x}: {}", r.value);
                assert!(r.kernel_mass <= 1.0 + 1e-15 && r.kernel_mass >= 1.0 - 1e-12);
                assert!((0.0..=1.0).contains(&r.atom_weight));
            }
        }
    }

    #[test]
    fn identity_reproduced_without_shift() {
        let t = registry("t").unwrap();
        let p = ShapeParams::from_ints(16, 1, 1, 0, 0).unwrap();
        for &x in &[0.25, 1.0, 3.0] {
            let v = apply(&p, &t, x, &cfg()).unwrap().value;
            assert!((v - x).abs() < 1e-10 * (1.0 + x));
        }
        let p = ShapeParams::from_ints(16, 1, 1, 1, 2).unwrap();
        let v = apply(&p, &t, 1.5, &cfg()).unwrap().value;
        assert!((v - (16.0 * 1.5 + 1.0) / 18.0).abs() < 1e-10);
    }

    #[test]
    fn endpoint_is_exact() {
        let f = registry("exp_neg").unwrap();
        let p = ShapeParams::from_ints(12, 1, 1, 1, 3).unwrap();
        let r = apply(&p, &f, 0.0, &cfg()).unwrap();
        assert_eq!(r.value, (-1.0f64 / 15.0).exp());
        assert_eq!(r.atom_weight, 1.0);
    }

    #[test]
    fn derivative_of_identity() {
        let t = registry("t").unwrap();
        let p = ShapeParams::from_ints(10, 1, 1, 0, 0).unwrap();
        let v = apply_derivative(&p, &t, 1, 0.7, &cfg()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
        let p = ShapeParams::from_ints(10, 1, 1, 1, 2).unwrap();
        let v = apply_derivative(&p, &t, 1, 0.7, &cfg()).unwrap().value;
        assert!((v - 10.0 / 12.0).abs() < 1e-12);
        let one = registry("one").unwrap();
        assert_eq!(apply_derivative(&p, &one, 1, 0.7, &cfg()).unwrap().value, 0.0);
    }

    #[test]
    fn derivative_preconditions() {
        let spline = registry("spline_c1").unwrap();
        let p = ShapeParams::from_ints(10, 1, 1, 0, 0).unwrap();
        assert!(matches!(
            apply_derivative(&p, &spline, 2, 1.0, &cfg()),
            Err(Error::Order { .. })
        ));
        let t2 = registry("t2").unwrap();
        let small = ShapeParams::from_ints(2, 1, 1, 0, 0).unwrap();
        assert!(matches!(apply_derivative(&small, &t2, 2, 1.0, &cfg()), Err(Error::Parameter(_))));
        let edge = ShapeParams::from_ints(3, 1, 1, 0, 0).unwrap();
        // n = 3 > γr = 2 but n ≤ μ + γr = 4
        assert!(matches!(apply_derivative(&edge, &t2, 2, 1.0, &cfg()), Err(Error::Parameter(_))));
    }

    #[test]
    fn integrability_is_checked() {
        let t8 = registry("t8").unwrap();
        let p = ShapeParams::from_ints(4, 1, 1, 0, 0).unwrap();
        assert!(matches!(apply(&p, &t8, 1.0, &cfg()), Err(Error::Integrability { .. })));
        assert!(apply(&p, &t8, -1.0, &cfg()).is_err());
    }

    #[test]
    fn prefactor_examples() {
        let p = ShapeParams::from_ints(10, 1, 1, 0, 2).unwrap();
        assert_eq!(derivative_prefactor_exact(&p, 1).unwrap(), rat(10, 12));
        // r = 2: (n/(n+β))^2 (c+1)/(c-1)
        assert_eq!(derivative_prefactor_exact(&p, 2).unwrap(), rat(100, 144) * rat(11, 9));
        assert_eq!(constant_reproduction(), Rational::one());
    }
}
