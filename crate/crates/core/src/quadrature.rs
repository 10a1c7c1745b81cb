//! Integrals `∫₀^∞ b_{n,k,γ}(t) g(t) dt` on the unit interval.
//!
//! With `u = γt/(1+γt)` the weight `b_{n,k,γ}(t) dt` is exactly the
//! Beta(k, n/γ+1) density in `u`, so the integrand on `[0, 1]` is smooth
//! apart from the growth of `g` near `u = 1`. Composite Gauss–Legendre
//! panels are doubled until two successive refinements agree.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::params::ShapeParams;
use crate::special;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-13,
            abs_tol: 1e-16,
            max_refinements: 14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-14) {
            return Err(Error::Parameter(format!("rel_tol must be ≥ 1e-14, got {:e}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Parameter(format!("abs_tol must be positive, got {:e}", self.abs_tol)));
        }
        if self.max_refinements < 1 {
            return Err(Error::Parameter("max_refinements must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error_bound: f64,
    pub refinements: usize,
}

const RULE_DEGREE: usize = 20;

/// Log-envelope drop below the peak past which the integrand is dropped.
/// `e^-46 ≈ 1e-20`.
const ENVELOPE_CUTOFF: f64 = 46.0;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let degree = NonZeroUsize::new(RULE_DEGREE).expect("nonzero degree");
        GaussLegendre::new(degree).as_node_weight_pairs().to_vec()
    })
}

/// The integrand on the unit interval: `Beta(k, n/γ+1)(u) · g(t(u))`.
///
/// Returns 0 wherever the density underflows, so `g` is never evaluated at
/// points whose contribution is zero anyway.
pub fn transformed_integrand<G: Fn(f64) -> f64 + ?Sized>(
    shape: f64,
    gamma: f64,
    k: u64,
    g: &G,
    u: f64,
) -> f64 {
    let one_minus_u = 1.0 - u;
    let ln_d = special::ln_beta_density(u, one_minus_u, k as f64, shape + 1.0);
    let d = ln_d.exp();
    if d == 0.0 {
        return 0.0;
    }
    let t = if one_minus_u > 0.0 { u / (gamma * one_minus_u) } else { f64::INFINITY };
    d * g(t)
}

/// Support of the integrand in `u` after dropping the region where the
/// envelope `u^{k-1}(1-u)^{n/γ-μ}` is more than `ENVELOPE_CUTOFF` below its peak.
fn support(shape: f64, k: u64, growth_mu: f64) -> (f64, f64) {
    let e1 = k as f64 - 1.0;
    let e2 = shape - growth_mu;
    if e2 <= 0.0 {
        return (0.0, 1.0);
    }
    let env = |u: f64| {
        let a = if e1 == 0.0 { 0.0 } else { e1 * u.ln() };
        a + e2 * (-u).ln_1p()
    };
    let peak_u = e1 / (e1 + e2);
    let cut = env(peak_u) - ENVELOPE_CUTOFF;
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if env(mid) >= cut {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let lo = if e1 > 0.0 && env(0.0) < cut { bisect(peak_u, 0.0) } else { 0.0 };
    let hi = bisect(peak_u, 1.0);
    (lo, hi)
}

/// Composite rule value and the same rule applied to `|f|`.
fn composite(panels: usize, lo: f64, hi: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    (0..panels).fold((0.0, 0.0), |(sum, abs), p| {
        let mid = lo + (p as f64 + 0.5) * width;
        let (s, a) = rule().iter().fold((0.0, 0.0), |(s, a), &(node, weight)| {
            let v = weight * f(mid + half * node);
            (s + v, a + v.abs())
        });
        (sum + half * s, abs + half * a)
    })
}

/// Changes below this multiple of `ε·∫|integrand|` are summation roundoff.
const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

/// `∫₀^∞ b_{n,k,γ}(t) g(t) dt` for `|g(t)| ≤ M(1+t)^μ`.
pub fn integrate_b_weighted<G: Fn(f64) -> f64 + ?Sized>(
    params: &ShapeParams,
    k: u64,
    g: &G,
    growth_mu: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureEstimate> {
    integrate_shape(params.shape_f64(), params.gamma_f64(), k, g, growth_mu, cfg)
}

pub(crate) fn integrate_shape<G: Fn(f64) -> f64 + ?Sized>(
    shape: f64,
    gamma: f64,
    k: u64,
    g: &G,
    growth_mu: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureEstimate> {
    if k == 0 {
        return Err(Error::Domain("k = 0 is the Dirac atom, not a quadrature".into()));
    }
    let limit = shape + 1.0;
    if !(growth_mu < limit) {
        return Err(Error::Integrability { mu: growth_mu, limit });
    }
    cfg.validate()?;
    let (lo, hi) = support(shape, k, growth_mu);
    let f = |u: f64| transformed_integrand(shape, gamma, k, g, u);

    let mut prev = composite(1, lo, hi, &f).0;
    let mut agreements = 0;
    let mut last_change = f64::INFINITY;
    for level in 1..=cfg.max_refinements {
        let (cur, magnitude) = composite(1 << level, lo, hi, &f);
        last_change = (cur - prev).abs();
        if !cur.is_finite() {
            break;
        }
        let tol = (cfg.rel_tol * cur.abs()).max(cfg.abs_tol).max(ROUNDOFF_FLOOR * magnitude);
        if last_change <= tol {
            agreements += 1;
            if agreements == 2 {
                return Ok(QuadratureEstimate {
                    value: cur,
                    error_bound: last_change,
                    refinements: level,
                });
            }
        } else {
            agreements = 0;
        }
        prev = cur;
    }
    Err(Error::NonConvergence {
        refinements: cfg.max_refinements,
        last_change,
    })
}

/// `∫₀^∞ b_{n,k,γ}(t) t^j dt = Γ(k+j) Γ(n/γ+1-j) / (Γ(k) Γ(n/γ+1) γ^j)`, exactly.
pub fn b_monomial_moment(params: &ShapeParams, k: u64, j: usize) -> Result<Rational> {
    let shape = params.shape();
    if Rational::from_integer(j.into()) >= &shape + exact::int(1) {
        return Err(Error::Divergent { order: j });
    }
    let kr = Rational::from_integer(k.into());
    Ok(exact::rising(&kr, j) / (exact::falling(&shape, j) * exact::pow(params.gamma(), j)))
}
