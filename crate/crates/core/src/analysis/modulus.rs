//! Moduli of continuity `ω_m(f, δ, [a, b])` for `m ∈ {1, 2}`.

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;

#[derive(Clone, Debug)]
pub struct ModulusQuery {
    pub f: FunctionSpec,
    pub order: usize,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
}

impl ModulusQuery {
    pub fn new(f: FunctionSpec, order: usize, delta: f64, a: f64, b: f64) -> Result<Self> {
        let q = ModulusQuery { f, order, delta, a, b };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.order) {
            return Err(Error::Parameter(format!("modulus order must be 1 or 2, got {}", self.order)));
        }
        if !(self.a > 0.0 && self.a < self.b && self.b.is_finite()) {
            return Err(Error::Parameter(format!("need 0 < a < b, got [{}, {}]", self.a, self.b)));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Parameter(format!("δ must be nonnegative, got {}", self.delta)));
        }
        if self.delta > (self.b - self.a) / self.order as f64 {
            return Err(Error::EmptyDomain(format!(
                "δ = {} exceeds (b - a)/{} = {}",
                self.delta,
                self.order,
                (self.b - self.a) / self.order as f64
            )));
        }
        Ok(())
    }
}

/// `Δ_h^m f(x) = Σ_i (-1)^{m-i} C(m, i) f(x + ih)`.
pub fn forward_difference(f: &FunctionSpec, order: usize, x: f64, h: f64) -> f64 {
    match order {
        1 => f.evaluate(x + h) - f.evaluate(x),
        2 => f.evaluate(x + 2.0 * h) - 2.0 * f.evaluate(x + h) + f.evaluate(x),
        _ => {
            let mut binom = 1.0;
            let mut sum = 0.0;
            for i in 0..=order {
                let sign = if (order - i) % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * binom * f.evaluate(x + i as f64 * h);
                binom = binom * (order - i) as f64 / (i + 1) as f64;
            }
            sum
        }
    }
}

const REFINE_TOL: f64 = 1e-4;
const MAX_GRID: usize = 4096;

/// `sup |Δ_h^m f(x)|` over `0 ≤ h ≤ δ` and `x, x + mh ∈ [a, b]`.
///
/// Negative steps give the same set of differences up to sign, so only
/// `h ≥ 0` is sampled. The `(x, h)` grid starts at `grid_points` per axis and
/// doubles until the sup changes by less than `1e-4` relative; grids are
/// nested, so the estimate only ever increases.
pub fn modulus_of_continuity(q: &ModulusQuery, grid_points: usize) -> Result<f64> {
    q.validate()?;
    if grid_points < 64 {
        return Err(Error::Parameter(format!("grid_points must be at least 64, got {grid_points}")));
    }
    if q.delta == 0.0 {
        return Ok(0.0);
    }
    let m = q.order as f64;
    let sup_on = |g: usize| -> f64 {
        let mut best: f64 = 0.0;
        for j in 0..=g {
            let h = q.delta * j as f64 / g as f64;
            let span = (q.b - q.a - m * h).max(0.0);
            for i in 0..=g {
                let x = q.a + span * i as f64 / g as f64;
                best = best.max(forward_difference(&q.f, q.order, x, h).abs());
            }
        }
        best
    };
    let mut g = grid_points;
    let mut prev = sup_on(g);
    while g < MAX_GRID {
        g *= 2;
        let cur = sup_on(g);
        if (cur - prev).abs() <= REFINE_TOL * cur.abs() || cur == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Instability(format!(
        "modulus did not settle to 1e-4 by a {MAX_GRID}-point grid (last value {prev})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::registry;

    fn omega(id: &str, order: usize, delta: f64) -> f64 {
        let q = ModulusQuery::new(registry(id).unwrap(), order, delta, 0.5, 2.5).unwrap();
        modulus_of_continuity(&q, 64).unwrap()
    }

    #[test]
    fn examples() {
        assert!((omega("t", 1, 0.3) - 0.3).abs() < 1e-12);
        assert!(omega("t", 2, 0.3) < 1e-12);
        assert!((omega("t2", 2, 0.3) - 2.0 * 0.09).abs() < 1e-12);
        assert_eq!(omega("sin", 2, 0.0), 0.0);
    }

    #[test]
    fn monotone_and_subadditive() {
        for id in ["sin", "exp_neg", "t3", "inv1p"] {
            let mut last = 0.0;
            for k in 1..=6 {
                let d = 0.05 * k as f64;
                let w = omega(id, 1, d);
                assert!(w >= last, "{id}");
                last = w;
                let w2 = omega(id, 1, 2.0 * d);
                assert!(w2 <= 2.0 * w * (1.0 + 1e-9), "{id} δ={d}");
            }
        }
    }

    #[test]
    fn empty_domain_is_rejected() {
        let f = registry("sin").unwrap();
        assert!(matches!(ModulusQuery::new(f.clone(), 2, 1.1, 0.5, 2.5), Err(Error::EmptyDomain(_))));
        assert!(ModulusQuery::new(f.clone(), 3, 0.1, 0.5, 2.5).is_err());
        assert!(ModulusQuery::new(f.clone(), 1, 0.1, 0.0, 2.5).is_err());
        let q = ModulusQuery::new(f, 1, 0.1, 0.5, 2.5).unwrap();
        assert!(modulus_of_continuity(&q, 10).is_err());
    }

    #[test]
    fn generic_difference_matches_special_cases() {
        let f = registry("exp_neg").unwrap();
        let d3 = forward_difference(&f, 3, 0.4, 0.1);
        let direct = f.evaluate(0.7) - 3.0 * f.evaluate(0.6) + 3.0 * f.evaluate(0.5) - f.evaluate(0.4);
        assert!((d3 - direct).abs() < 1e-15);
    }
}
