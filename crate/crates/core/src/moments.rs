//! Exact moments of the operator as polynomials in `x`.
//!
//! Central moments come from the three-term recurrence; raw moments
//! `B(t^m, x)` come from an independent closed form built on the
//! negative-binomial factorial moments, so the two can be checked against
//! each other entry by entry.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::params::ShapeParams;
use crate::poly::RationalPoly;

/// `μ_m(x) = B((t - x)^m, x)` for `m = 0..=max_order`.
///
/// Entries past the first recurrence pole are absent; `valid[m]` tells which.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub params: ShapeParams,
    pub max_order: usize,
    pub central: Vec<RationalPoly>,
    pub valid: Vec<bool>,
    /// Why the table stops short of `max_order`, if it does.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
}

impl MomentTable {
    /// `μ_m`, or the pole error if the recurrence could not reach it.
    pub fn get(&self, m: usize) -> Result<&RationalPoly> {
        if m > self.max_order {
            return Err(Error::Parameter(format!("moment order {m} beyond table size {}", self.max_order)));
        }
        self.central.get(m).ok_or(Error::RecurrencePole { m: m - 1 })
    }

    /// Highest order actually computed.
    pub fn computed_order(&self) -> usize {
        self.central.len() - 1
    }

    pub fn is_complete(&self) -> bool {
        self.stopped.is_none()
    }

    /// Error for the first missing entry, if any.
    pub fn require_complete(&self) -> Result<()> {
        match self.stopped {
            None => Ok(()),
            Some(_) => Err(Error::RecurrencePole { m: self.computed_order() }),
        }
    }
}

/// `x(1 + γx)`.
fn variance_poly(gamma: &Rational) -> RationalPoly {
    RationalPoly::new(vec![Rational::zero(), Rational::one(), gamma.clone()])
}

/// Central moments through the recurrence
///
/// ```text
/// (n-γm)(n+β) μ_{m+1} = n x(1+γx) (μ_m' + m μ_{m-1})
///                     + {mn + n²x - (2γm - n)(α - (n+β)x)} μ_m
///                     + {mγ(n+β)d² - mnd} μ_{m-1},        d = α/(n+β) - x
/// ```
///
/// The step to `μ_{m+1}` needs `n > γm`; the table stops at the first
/// order where that fails.
pub fn central_moments(params: &ShapeParams, max_order: usize) -> MomentTable {
    let n = params.n();
    let gamma = params.gamma();
    let alpha = params.alpha();
    let nb = n + params.beta();

    let q = variance_poly(gamma);
    let d = RationalPoly::new(vec![alpha / &nb, -Rational::one()]);
    let d2 = &d * &d;
    let alpha_shift = RationalPoly::new(vec![alpha.clone(), -nb.clone()]);
    let nq = q.scale(n);

    let mut central = vec![RationalPoly::one()];
    let mut stopped = None;
    for m in 0..max_order {
        let mr = Rational::from_integer(m.into());
        let lead = (n - gamma * &mr) * &nb;
        if !lead.is_positive() {
            stopped = Some(Error::RecurrencePole { m }.to_string());
            break;
        }
        let mu = &central[m];
        let prev = if m > 0 { central[m - 1].clone() } else { RationalPoly::zero() };

        let first = &nq * &(&mu.derivative() + &prev.scale(&mr));
        let two_gm_minus_n = Rational::from_integer(2.into()) * gamma * &mr - n;
        let mid_coeff = &(&RationalPoly::new(vec![&mr * n, n * n]) - &alpha_shift.scale(&two_gm_minus_n));
        let second = mid_coeff * mu;
        let last_coeff = &d2.scale(&(&mr * gamma * &nb)) - &d.scale(&(&mr * n));
        let third = &last_coeff * &prev;

        let next = (&(&first + &second) + &third).scale(&(Rational::one() / lead));
        central.push(next);
    }
    let valid = (0..=max_order).map(|m| m < central.len()).collect();
    MomentTable {
        params: params.clone(),
        max_order,
        central,
        valid,
        stopped,
    }
}

/// `E[rising(k, j)]` under the basis weights, as a polynomial in `x`:
/// rising factorials go to powers (unsigned Stirling, first kind), powers
/// to falling factorials (second kind), and
/// `E[k(k-1)…(k-i+1)] = (n/γ)(n/γ+1)…(n/γ+i-1) (γx)^i`.
fn expected_rising(shape: &Rational, gamma: &Rational, j: usize) -> RationalPoly {
    let mut coeffs = vec![Rational::zero(); j + 1];
    for i in 0..=j {
        let c1 = exact::stirling1_unsigned(j, i);
        if c1.is_zero() {
            continue;
        }
        for (l, coeff) in coeffs.iter_mut().enumerate().take(i + 1) {
            let s2 = exact::stirling2(i, l);
            if s2.is_zero() {
                continue;
            }
            let weight: BigInt = &c1 * &s2;
            *coeff += Rational::from_integer(weight) * exact::rising(shape, l) * exact::pow(gamma, l);
        }
    }
    RationalPoly::new(coeffs)
}

/// `B(t^m, x)` for `m = 0..=max_order`, exactly.
pub fn raw_moments(params: &ShapeParams, max_order: usize) -> Result<Vec<RationalPoly>> {
    let shape = params.shape();
    if Rational::from_integer(max_order.into()) >= &shape + Rational::one() {
        return Err(Error::Divergent { order: max_order });
    }
    let gamma = params.gamma();
    // Kernel moments Σ_k p_k ∫ b_k t^j, with the atom folded into j = 0.
    let kernel: Vec<RationalPoly> = (0..=max_order)
        .map(|j| {
            if j == 0 {
                return RationalPoly::one();
            }
            let scale = Rational::one() / (exact::falling(&shape, j) * exact::pow(gamma, j));
            expected_rising(&shape, gamma, j).scale(&scale)
        })
        .collect();

    let n = params.n();
    let nb = n + params.beta();
    Ok((0..=max_order)
        .map(|m| {
            let denom = Rational::one() / exact::pow(&nb, m);
            (0..=m).fold(RationalPoly::zero(), |acc, j| {
                let c = Rational::from_integer(exact::binomial(m, j))
                    * exact::pow(n, j)
                    * exact::pow(params.alpha(), m - j)
                    * &denom;
                &acc + &kernel[j].scale(&c)
            })
        })
        .collect())
}

/// `μ_m = Σ_j C(m, j) (-x)^{m-j} B(t^j, x)`.
pub fn central_from_raw(raw: &[RationalPoly], max_order: usize) -> Result<Vec<RationalPoly>> {
    if raw.len() <= max_order {
        return Err(Error::Parameter(format!(
            "need raw moments through order {max_order}, have {}",
            raw.len().saturating_sub(1)
        )));
    }
    let minus_x = RationalPoly::new(vec![Rational::zero(), -Rational::one()]);
    Ok((0..=max_order)
        .map(|m| {
            (0..=m).fold(RationalPoly::zero(), |acc, j| {
                let c = Rational::from_integer(exact::binomial(m, j));
                &acc + &(&minus_x.pow(m - j) * &raw[j]).scale(&c)
            })
        })
        .collect())
}

/// `U_m(x) = Σ_k p_{n,k,γ}(x) (k/n - x)^m` via
/// `n U_{m+1} = x(1+γx)(U_m' + m U_{m-1})`.
pub fn baskakov_u_moments(n: &Rational, gamma: &Rational, max_order: usize) -> Result<Vec<RationalPoly>> {
    if !n.is_positive() || !gamma.is_positive() {
        return Err(Error::InvalidParams("U moments need n > 0 and γ > 0".into()));
    }
    let q = variance_poly(gamma).scale(&(Rational::one() / n));
    let mut u = vec![RationalPoly::one(), RationalPoly::zero()];
    for m in 1..max_order {
        let mr = Rational::from_integer(m.into());
        let next = &q * &(&u[m].derivative() + &u[m - 1].scale(&mr));
        u.push(next);
    }
    u.truncate(max_order + 1);
    Ok(u)
}

/// One row of [`asymptotic_raw_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    #[serde(with = "exact::as_string")]
    pub n: Rational,
    #[serde(with = "exact::as_string")]
    pub exact_leading: Rational,
    #[serde(with = "exact::as_string")]
    pub expansion_leading: Rational,
    #[serde(with = "exact::as_string")]
    pub exact_subleading: Rational,
    #[serde(with = "exact::as_string")]
    pub expansion_subleading: Rational,
}

impl AsymptoticRow {
    pub fn leading_difference(&self) -> Rational {
        &self.exact_leading - &self.expansion_leading
    }
    pub fn subleading_difference(&self) -> Rational {
        &self.exact_subleading - &self.expansion_subleading
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub m: usize,
    pub rows: Vec<AsymptoticRow>,
    /// Log–log slope of |difference| in `n`; `None` when the difference is identically zero.
    pub leading_decay: Option<f64>,
    pub subleading_decay: Option<f64>,
}

/// Compares the exact coefficients of `x^m` and `x^{m-1}` in `B(t^m, x)`
/// with the closed-form leading terms of its large-`n` expansion
///
/// ```text
/// n^m Γ(c+m) Γ(c-m+1) / ((n+β)^m Γ(c+1) Γ(c))                                    x^m
/// m n^{m-1} Γ(c+m-1) Γ(c-m+1) / ((n+β)^m Γ(c+1) Γ(c)) · {n(m-1) + α(c-m+1)}      x^{m-1}
/// ```
///
/// with `c = n/γ`, over `n = 2^4..2^12` (γ, α, β taken from `params`).
pub fn asymptotic_raw_check(params: &ShapeParams, m: usize) -> Result<AsymptoticReport> {
    if m > 4 {
        return Err(Error::Parameter(format!("asymptotic check supports m ≤ 4, got {m}")));
    }
    let mut rows = Vec::new();
    for e in 4..=12 {
        let n = Rational::from_integer(BigInt::from(1u64 << e));
        let p = params.with_n(n.clone())?;
        if &n <= &(p.gamma() * Rational::from_integer(m.into())) {
            return Err(Error::Parameter(format!("need n > γm, got n = {n}")));
        }
        let raw = raw_moments(&p, m)?;
        let c = p.shape();
        let nb = &n + p.beta();
        let exact_leading = raw[m].coeff(m);
        let exact_subleading = if m == 0 { Rational::zero() } else { raw[m].coeff(m - 1) };
        let falling_m = exact::falling(&c, m);
        let expansion_leading = exact::pow(&(&n / &nb), m) * exact::rising(&c, m) / &falling_m;
        let expansion_subleading = if m == 0 {
            Rational::zero()
        } else {
            let mr = Rational::from_integer(m.into());
            let bracket = &n * (&mr - Rational::one()) + p.alpha() * (&c - &mr + Rational::one());
            &mr * exact::pow(&n, m - 1) * exact::rising(&c, m - 1) / (&falling_m * exact::pow(&nb, m)) * bracket
        };
        rows.push(AsymptoticRow {
            n,
            exact_leading,
            expansion_leading,
            exact_subleading,
            expansion_subleading,
        });
    }
    let decay = |diff: &dyn Fn(&AsymptoticRow) -> Rational| -> Option<f64> {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (exact::to_f64(&r.n), exact::to_f64(&diff(r)).abs()))
            .filter(|&(_, v)| v > 0.0)
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        crate::analysis::log_log_slope(&xs, &ys).ok().map(|f| f.slope)
    };
    let leading_decay = decay(&|r| r.leading_difference());
    let subleading_decay = decay(&|r| r.subleading_difference());
    Ok(AsymptoticReport {
        m,
        rows,
        leading_decay,
        subleading_decay,
    })
}
