//! The discrete basis `p_{n,k,γ}`, the density basis `b_{n,k,γ}`, and the
//! exact polynomial structure of `D^r p_{n,k,γ}`.
//!
//! ```text
//! p_{n,k,γ}(x) = Γ(n/γ+k) / (Γ(k+1) Γ(n/γ)) · (γx)^k / (1+γx)^(n/γ+k)
//! b_{n,k,γ}(t) = γ Γ(n/γ+k+1) / (Γ(k) Γ(n/γ+1)) · (γt)^(k-1) / (1+γt)^(n/γ+k+1)
//! ```
//!
//! Floating evaluation is done in log space; `p` is a negative-binomial
//! pmf in `k` and `b(t) dt` is a Beta(k, n/γ+1) density after
//! `u = γt/(1+γt)`, so both reuse the saddle-point densities in
//! [`crate::special`].

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::params::ShapeParams;
use crate::poly::{RationalPoly, TrivariatePoly};
use crate::special;

/// A real number stored as `sign · exp(log_magnitude)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub sign: i8,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        sign: 0,
    };

    pub fn from_log(log_magnitude: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue { log_magnitude, sign: 1 }
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                log_magnitude: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }
}

/// `p_{n,k,γ}(x)` in log space.
pub fn eval_p(params: &ShapeParams, k: u64, x: f64) -> Result<LogValue> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("p_(n,k,γ)(x) needs x ≥ 0, got {x}")));
    }
    let s = params.gamma_f64() * x;
    Ok(LogValue::from_log(special::ln_negative_binomial(params.shape_f64(), k as f64, s)))
}

/// `b_{n,k,γ}(t)` in log space; `k = 0` is the Dirac atom and has no density.
pub fn eval_b(params: &ShapeParams, k: u64, t: f64) -> Result<LogValue> {
    if k == 0 {
        return Err(Error::Domain("b_(n,0,γ) is the Dirac atom at t = 0, not a density".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("b_(n,k,γ)(t) needs t ≥ 0, got {t}")));
    }
    let g = params.gamma_f64();
    let gt = g * t;
    if gt.is_infinite() {
        return Ok(LogValue::ZERO);
    }
    let u = gt / (1.0 + gt);
    let one_minus_u = 1.0 / (1.0 + gt);
    let ln_density = special::ln_beta_density(u, one_minus_u, k as f64, params.shape_f64() + 1.0);
    // b(t) = Beta(u) · du/dt, du/dt = γ / (1+γt)^2
    Ok(LogValue::from_log(ln_density + g.ln() - 2.0 * gt.ln_1p()))
}

/// `p_{n,k+1,γ}(x) / p_{n,k,γ}(x) = (n/γ + k)/(k + 1) · γx/(1 + γx)`.
pub fn p_ratio(params: &ShapeParams, k: u64, x: f64) -> f64 {
    shape_ratio(params.shape_f64(), k, params.gamma_f64() * x)
}

fn shape_ratio(shape: f64, k: u64, s: f64) -> f64 {
    let k = k as f64;
    (shape + k) / (k + 1.0) * (s / (1.0 + s))
}

/// Contiguous run of `p_{n,k,γ}(x)` weights covering all but a bounded tail.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisWindow {
    /// Index of `weights[0]`.
    pub k_lo: u64,
    pub weights: Vec<f64>,
    /// Rigorous bound on the omitted mass on both sides.
    pub tail_bound: f64,
}

impl BasisWindow {
    pub fn k_hi(&self) -> u64 {
        self.k_lo + self.weights.len() as u64 - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(i, &w)| (self.k_lo + i as u64, w))
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weight(&self, k: u64) -> f64 {
        if k < self.k_lo {
            return 0.0;
        }
        self.weights.get((k - self.k_lo) as usize).copied().unwrap_or(0.0)
    }
}

/// Relative tail tolerance used when truncating basis sums.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// Weights `p_{n,k,γ}(x)` for the window of `k` around the mode whose
/// omitted tails are below `rel_tol` times the included mass.
///
/// Starts at the mode (evaluated in log space) and walks outward with
/// [`p_ratio`]. On the right the ratio decreases towards `γx/(1+γx) < 1`,
/// on the left the inverse ratio decreases towards 0, so each side's tail
/// is bounded by a geometric series.
pub fn basis_window(params: &ShapeParams, x: f64, rel_tol: f64) -> Result<BasisWindow> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("basis window needs finite x ≥ 0, got {x}")));
    }
    Ok(window_for_shape(params.shape_f64(), params.gamma_f64() * x, rel_tol))
}

pub(crate) fn window_for_shape(shape: f64, s: f64, rel_tol: f64) -> BasisWindow {
    if s == 0.0 {
        return BasisWindow {
            k_lo: 0,
            weights: vec![1.0],
            tail_bound: 0.0,
        };
    }
    let q = s / (1.0 + s);
    let mode = if shape > 1.0 { ((shape - 1.0) * s).floor() as u64 } else { 0 };
    let p_mode = special::ln_negative_binomial(shape, mode as f64, s).exp();

    let mut right = Vec::new();
    let mut total = p_mode;
    let mut term = p_mode;
    let mut k = mode;
    let right_bound = loop {
        let ratio = shape_ratio(shape, k, s);
        let sup_ratio = if shape >= 1.0 { ratio } else { q };
        if sup_ratio < 1.0 {
            let bound = term * ratio / (1.0 - sup_ratio);
            if bound <= rel_tol * total || term == 0.0 {
                break bound;
            }
        }
        term *= ratio;
        k += 1;
        total += term;
        right.push(term);
    };

    let mut left = Vec::new();
    let mut term = p_mode;
    let mut k = mode;
    let left_bound = loop {
        if k == 0 {
            break 0.0;
        }
        // p_{k-1}/p_k, decreasing as k decreases when shape ≥ 1
        let back = 1.0 / shape_ratio(shape, k - 1, s);
        if back < 1.0 {
            let bound = term * back / (1.0 - back);
            if bound <= rel_tol * total || term == 0.0 {
                break bound;
            }
        }
        term *= back;
        k -= 1;
        total += term;
        left.push(term);
    };

    let k_lo = mode - left.len() as u64;
    let mut weights = left;
    weights.reverse();
    weights.push(p_mode);
    weights.extend(right);
    BasisWindow {
        k_lo,
        weights,
        tail_bound: left_bound + right_bound,
    }
}

/// `S_r(x, k, n)` with `{x(1+γx)}^r D^r p_{n,k,γ}(x) = S_r · p_{n,k,γ}(x)`.
///
/// Variables are positional `(x, k, n)`. With `A = x(1+γx)`, differentiating
/// `D^r p = S_r A^{-r} p` once and using `A p' = (k - n x) p` gives
///
/// ```text
/// S_0 = 1
/// S_{r+1} = A ∂S_r/∂x + (k - n x - r A') S_r,    A' = 1 + 2γx
/// ```
pub fn s_polynomials(r: usize, gamma: &Rational) -> TrivariatePoly {
    let a = &TrivariatePoly::monomial((1, 0, 0), Rational::one()) + &TrivariatePoly::monomial((2, 0, 0), gamma.clone());
    let mut s = TrivariatePoly::one();
    for step in 0..r {
        let step_r = Rational::from_integer(step.into());
        let mut factor = TrivariatePoly::monomial((0, 1, 0), Rational::one());
        factor.add_term((1, 0, 1), -Rational::one());
        factor.add_term((0, 0, 0), -step_r.clone());
        factor.add_term((1, 0, 0), -(&step_r * gamma * exact::int(2)));
        s = &(&a * &s.partial(0)) + &(&factor * &s);
    }
    s
}

/// `Q_{i,j,r,γ}(x)` keyed by `(i, j)`: coefficient of `n^i (k - n x)^j`.
pub type QTable = BTreeMap<(usize, usize), RationalPoly>;

/// Rewrites `S_r(x, k, n)` in the basis `n^i (k - n x)^j` and checks that the
/// result only uses indices with `2i + j ≤ r`.
pub fn q_decomposition(s: &TrivariatePoly, r: usize) -> Result<QTable> {
    // k = w + n x, with w taking over the k slot
    let mut shift = TrivariatePoly::monomial((0, 1, 0), Rational::one());
    shift.add_term((1, 0, 1), Rational::one());
    let in_w = s.substitute_y(&shift);

    let mut grouped: BTreeMap<(usize, usize), Vec<Rational>> = BTreeMap::new();
    for (&(ex, ew, en), c) in in_w.terms() {
        if 2 * en + ew > r {
            return Err(Error::Structure(format!(
                "term n^{en} (k-nx)^{ew} x^{ex} falls outside 2i + j ≤ {r}"
            )));
        }
        let coeffs = grouped.entry((en, ew)).or_default();
        if coeffs.len() <= ex {
            coeffs.resize(ex + 1, Rational::zero());
        }
        coeffs[ex] += c;
    }
    Ok(grouped
        .into_iter()
        .map(|(key, coeffs)| (key, RationalPoly::new(coeffs)))
        .filter(|(_, p)| !p.is_zero())
        .collect())
}

/// `Σ_{(i,j)} n^i (k - n x)^j Q_{i,j}(x)` at exact rational arguments.
pub fn eval_q_table(table: &QTable, n: &Rational, k: &Rational, x: &Rational) -> Rational {
    let w = k - n * x;
    table
        .iter()
        .map(|(&(i, j), q)| exact::pow(n, i) * exact::pow(&w, j) * q.eval(x))
        .sum()
}

/// Exact `p_{n,k,γ}(x)`; requires `n/γ` to be a positive integer so the
/// power `(1+γx)^{-(n/γ+k)}` stays rational.
pub fn p_exact(params: &ShapeParams, k: u64, x: &Rational) -> Result<Rational> {
    let shape = params.shape();
    if !shape.is_integer() {
        return Err(Error::Domain(format!(
            "exact p needs integral n/γ, got {}",
            exact::format_rational(&shape)
        )));
    }
    let k_us = k as usize;
    let gx = params.gamma() * x;
    let coeff = exact::rising(&shape, k_us) / exact::rising(&Rational::one(), k_us);
    let denom_power = shape.to_integer() + num_bigint::BigInt::from(k);
    let e: usize = denom_power
        .try_into()
        .map_err(|_| Error::Domain("exponent n/γ + k out of range".into()))?;
    Ok(coeff * exact::pow(&gx, k_us) / exact::pow(&(Rational::one() + &gx), e))
}

/// `D^r p_{n,k,γ}(x) / p_{n,k,γ}(x)` exactly, for any rational parameters.
///
/// Uses Leibniz' rule on `x^k · (1+γx)^{-(n/γ+k)}`, independent of the
/// `S_r` recursion:
///
/// ```text
/// D^r p / p = Σ_j C(r,j) k^(j) x^{-j} · (-(n/γ+k))^(r-j) γ^{r-j} (1+γx)^{-(r-j)}
/// ```
///
/// where `a^(j)` is the falling factorial.
pub fn dr_p_over_p_exact(params: &ShapeParams, k: u64, r: usize, x: &Rational) -> Result<Rational> {
    if *x <= Rational::zero() {
        return Err(Error::Domain("D^r p / p needs x > 0".into()));
    }
    let kr = Rational::from_integer(k.into());
    let neg_power = -(params.shape() + &kr);
    let one_plus = Rational::one() + params.gamma() * x;
    let mut acc = Rational::zero();
    for j in 0..=r {
        let left = exact::falling(&kr, j) / exact::pow(x, j);
        let right = exact::falling(&neg_power, r - j) * exact::pow(params.gamma(), r - j) / exact::pow(&one_plus, r - j);
        acc += Rational::from_integer(exact::binomial(r, j)) * left * right;
    }
    Ok(acc)
}

/// Exact `D^r p_{n,k,γ}(x)`; needs integral `n/γ` (see [`p_exact`]) and `x > 0`.
pub fn dr_p_exact(params: &ShapeParams, k: u64, r: usize, x: &Rational) -> Result<Rational> {
    let p = p_exact(params, k, x)?;
    Ok(dr_p_over_p_exact(params, k, r, x)? * p)
}
