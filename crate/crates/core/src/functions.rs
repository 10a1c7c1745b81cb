//! Test functions with analytic derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type DerivFn = dyn Fn(usize, f64) -> f64 + Send + Sync;

/// A function `f` on `[0, ∞)` with derivatives up to `max_order` and growth
/// `|f(t)| ≤ M (1+t)^μ`.
#[derive(Clone)]
pub struct FunctionSpec {
    id: String,
    max_order: usize,
    growth_mu: f64,
    eval: Arc<DerivFn>,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("id", &self.id)
            .field("max_order", &self.max_order)
            .field("growth_mu", &self.growth_mu)
            .finish()
    }
}

impl FunctionSpec {
    /// `derivative(order, t)` must be valid for every `order ≤ max_order`.
    pub fn new(
        id: impl Into<String>,
        max_order: usize,
        growth_mu: f64,
        derivative: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FunctionSpec {
            id: id.into(),
            max_order,
            growth_mu,
            eval: Arc::new(derivative),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn growth_mu(&self) -> f64 {
        self.growth_mu
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        (self.eval)(0, t)
    }

    pub fn derivative(&self, order: usize, t: f64) -> Result<f64> {
        if order > self.max_order {
            return Err(Error::Order {
                requested: order,
                available: self.max_order,
            });
        }
        Ok((self.eval)(order, t))
    }

    /// Unchecked derivative for hot loops; caller has validated `order`.
    pub(crate) fn derivative_unchecked(&self, order: usize, t: f64) -> f64 {
        (self.eval)(order, t)
    }

    /// `Σ c_i t^i` with all derivatives.
    pub fn polynomial(id: impl Into<String>, coeffs: Vec<f64>) -> Self {
        let degree = coeffs.len().saturating_sub(1);
        FunctionSpec::new(id, usize::MAX, degree as f64, move |order, t| {
            // Horner on the differentiated coefficients
            coeffs.iter().enumerate().skip(order).rev().fold(0.0, |acc, (i, &c)| {
                let falling: f64 = (0..order).map(|j| (i - j) as f64).product();
                acc * t + c * falling
            })
        })
    }

    /// `t^m`.
    pub fn monomial(m: usize) -> Self {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[m] = 1.0;
        Self::polynomial(format!("t{m}"), coeffs)
    }

    /// `(t - x)^m`, the integrand of the central moments.
    pub fn centered_power(x: f64, m: usize) -> Self {
        FunctionSpec::new(format!("(t-{x})^{m}"), usize::MAX, m as f64, move |order, t| {
            if order > m {
                return 0.0;
            }
            let falling: f64 = (0..order).map(|j| (m - j) as f64).product();
            falling * (t - x).powi((m - order) as i32)
        })
    }

    /// `a·f + b·g`.
    pub fn linear_combination(a: f64, f: &FunctionSpec, b: f64, g: &FunctionSpec) -> Self {
        let (f, g) = (f.clone(), g.clone());
        FunctionSpec::new(
            format!("{a}*{}+{b}*{}", f.id, g.id),
            f.max_order.min(g.max_order),
            f.growth_mu.max(g.growth_mu),
            move |order, t| a * (f.eval)(order, t) + b * (g.eval)(order, t),
        )
    }

    /// `f^{(order)}` as a function in its own right; growth exponent is kept.
    pub fn derived(&self, order: usize) -> Result<FunctionSpec> {
        if order > self.max_order {
            return Err(Error::Order {
                requested: order,
                available: self.max_order,
            });
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let eval = Arc::clone(&self.eval);
        Ok(FunctionSpec::new(
            format!("{}^({order})", self.id),
            self.max_order - order,
            self.growth_mu,
            move |o, t| eval(o + order, t),
        ))
    }

    /// `sup_{t ≥ 0} |f(t)| / (1+t)^μ`, estimated on a log-spaced grid up to `t = 1e4`.
    pub fn growth_norm(&self) -> f64 {
        let mut best: f64 = self.evaluate(0.0).abs();
        for i in 0..=4000 {
            let t = 10f64.powf(-4.0 + 8.0 * i as f64 / 4000.0);
            let v = self.evaluate(t).abs() / (1.0 + t).powf(self.growth_mu);
            best = best.max(v);
        }
        best
    }
}

/// Identifiers accepted by [`registry`].
pub const REGISTRY_IDS: &[&str] = &[
    "one", "t", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "exp_neg", "inv1p", "sin", "spline_c1",
];

/// Looks up a named test function.
///
/// - `one`, `t`, `t2` … `t8`: monomials with exact derivatives of every order
/// - `exp_neg`: `exp(-t)`
/// - `inv1p`: `1/(1+t)`
/// - `sin`: `sin t`
/// - `spline_c1`: `(t-1)_+^2`, C¹ but not C²; only the first derivative is exposed
pub fn registry(id: &str) -> Result<FunctionSpec> {
    let spec = match id {
        "one" => FunctionSpec::polynomial("one", vec![1.0]),
        "t" => FunctionSpec::polynomial("t", vec![0.0, 1.0]),
        "exp_neg" => FunctionSpec::new("exp_neg", usize::MAX, 0.0, |order, t| {
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            sign * (-t).exp()
        }),
        "inv1p" => FunctionSpec::new("inv1p", usize::MAX, 0.0, |order, t| {
            // D^r (1+t)^{-1} = (-1)^r r! (1+t)^{-(r+1)}
            let fact: f64 = (1..=order).map(|j| j as f64).product();
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact * (1.0 + t).powi(-(order as i32 + 1))
        }),
        "sin" => FunctionSpec::new("sin", usize::MAX, 0.0, |order, t| match order % 4 {
            0 => t.sin(),
            1 => t.cos(),
            2 => -t.sin(),
            _ => -t.cos(),
        }),
        "spline_c1" => FunctionSpec::new("spline_c1", 1, 2.0, |order, t| {
            let s = (t - 1.0).max(0.0);
            match order {
                0 => s * s,
                _ => 2.0 * s,
            }
        }),
        other => {
            let m = other
                .strip_prefix('t')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|m| (2..=8).contains(m))
                .ok_or_else(|| Error::Parameter(format!("unknown function id {other:?}")))?;
            FunctionSpec::monomial(m)
        }
    };
    Ok(spec)
}

/// Checks each exposed derivative against a central difference of the
/// previous one on `grid`; returns the worst relative mismatch.
pub fn finite_difference_self_check(f: &FunctionSpec, grid: &[f64], orders: usize) -> f64 {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for order in 1..=orders.min(f.max_order) {
        for &t in grid {
            let fd = (f.derivative_unchecked(order - 1, t + h) - f.derivative_unchecked(order - 1, t - h)) / (2.0 * h);
            let exact = f.derivative_unchecked(order, t);
            worst = worst.max((fd - exact).abs() / (1.0 + exact.abs()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_derivatives_agree_with_finite_differences() {
        // off the spline knot at t = 1, where f'' jumps
        let grid: Vec<f64> = (1..40).map(|i| 0.1 * i as f64 + 0.013).collect();
        for id in REGISTRY_IDS {
            let f = registry(id).unwrap();
            assert_eq!(f.derivative(0, 1.3).unwrap(), f.evaluate(1.3));
            let worst = finite_difference_self_check(&f, &grid, 4);
            assert!(worst < 1e-6, "{id}: {worst}");
        }
    }

    #[test]
    fn polynomial_derivatives() {
        let f = FunctionSpec::polynomial("p", vec![1.0, -2.0, 0.0, 4.0]);
        assert_eq!(f.evaluate(2.0), 1.0 - 4.0 + 32.0);
        assert_eq!(f.derivative(1, 2.0).unwrap(), -2.0 + 48.0);
        assert_eq!(f.derivative(3, 5.0).unwrap(), 24.0);
        assert_eq!(f.derivative(4, 5.0).unwrap(), 0.0);
        assert_eq!(f.growth_mu(), 3.0);
    }

    #[test]
    fn order_errors() {
        let s = registry("spline_c1").unwrap();
        assert!(matches!(s.derivative(2, 1.0), Err(Error::Order { requested: 2, available: 1 })));
        assert!(registry("t9").is_err());
        assert!(registry("nope").is_err());
    }

    #[test]
    fn growth_norms() {
        // t²/(1+t)² approaches its supremum 1 only as t → ∞
        assert!((registry("t2").unwrap().growth_norm() - 1.0).abs() < 1e-3);
        assert!((registry("sin").unwrap().growth_norm() - 1.0).abs() < 1e-6);
        assert!((registry("exp_neg").unwrap().growth_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derived_functions() {
        let f = registry("t3").unwrap().derived(1).unwrap();
        assert_eq!(f.evaluate(2.0), 12.0);
        assert_eq!(f.derivative(1, 2.0).unwrap(), 12.0);
        let s = registry("spline_c1").unwrap();
        assert_eq!(s.derived(1).unwrap().max_order(), 0);
        assert!(s.derived(2).is_err());
    }

    #[test]
    fn centered_power_derivatives() {
        let f = FunctionSpec::centered_power(1.5, 3);
        assert_eq!(f.evaluate(2.5), 1.0);
        assert_eq!(f.derivative(2, 2.5).unwrap(), 6.0);
        assert_eq!(f.derivative(4, 2.5).unwrap(), 0.0);
    }
}
