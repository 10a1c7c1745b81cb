use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// The operator parameters `(n, γ, α, β)`.
///
/// Stored exactly so the rational paths never see rounding; the `*_f64`
/// accessors feed the floating paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeParams {
    n: Rational,
    gamma: Rational,
    alpha: Rational,
    beta: Rational,
}

impl ShapeParams {
    pub fn new(n: Rational, gamma: Rational, alpha: Rational, beta: Rational) -> Result<Self> {
        if !n.is_positive() {
            return Err(Error::InvalidParams(format!("n must be positive, got {}", exact::format_rational(&n))));
        }
        if !gamma.is_positive() {
            return Err(Error::InvalidParams(format!(
                "gamma must be positive, got {}",
                exact::format_rational(&gamma)
            )));
        }
        if alpha.is_negative() || alpha > beta {
            return Err(Error::InvalidParams(format!(
                "need 0 ≤ alpha ≤ beta, got alpha = {}, beta = {}",
                exact::format_rational(&alpha),
                exact::format_rational(&beta)
            )));
        }
        Ok(ShapeParams { n, gamma, alpha, beta })
    }

    /// Parses each field from `"p/q"`, integer or decimal notation.
    pub fn parse(n: &str, gamma: &str, alpha: &str, beta: &str) -> Result<Self> {
        Self::new(
            exact::parse_rational(n)?,
            exact::parse_rational(gamma)?,
            exact::parse_rational(alpha)?,
            exact::parse_rational(beta)?,
        )
    }

    /// Convenience constructor from small integers and `gamma = gn/gd`.
    pub fn from_ints(n: i64, gamma_num: i64, gamma_den: i64, alpha: i64, beta: i64) -> Result<Self> {
        Self::new(
            exact::int(n),
            exact::rat(gamma_num, gamma_den),
            exact::int(alpha),
            exact::int(beta),
        )
    }

    pub fn n(&self) -> &Rational {
        &self.n
    }
    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }
    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }
    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    /// `n / γ`, the negative-binomial shape.
    pub fn shape(&self) -> Rational {
        &self.n / &self.gamma
    }

    pub fn n_f64(&self) -> f64 {
        exact::to_f64(&self.n)
    }
    pub fn gamma_f64(&self) -> f64 {
        exact::to_f64(&self.gamma)
    }
    pub fn alpha_f64(&self) -> f64 {
        exact::to_f64(&self.alpha)
    }
    pub fn beta_f64(&self) -> f64 {
        exact::to_f64(&self.beta)
    }
    pub fn shape_f64(&self) -> f64 {
        exact::to_f64(&self.shape())
    }

    /// Same `γ, α, β` with a different `n` (used by the shifted bases `n ± γr`).
    pub fn with_n(&self, n: Rational) -> Result<Self> {
        Self::new(n, self.gamma.clone(), self.alpha.clone(), self.beta.clone())
    }

    /// `n + γ·shift` for a signed integer shift.
    pub fn shifted(&self, shift: i64) -> Result<Self> {
        let n = &self.n + &self.gamma * Rational::from_integer(shift.into());
        if n.is_zero() || n.is_negative() {
            return Err(Error::Parameter(format!(
                "n + γ·({shift}) = {} is not positive",
                exact::format_rational(&n)
            )));
        }
        self.with_n(n)
    }
}

impl fmt::Display for ShapeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} γ={} α={} β={}",
            exact::format_rational(&self.n),
            exact::format_rational(&self.gamma),
            exact::format_rational(&self.alpha),
            exact::format_rational(&self.beta)
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: String,
    gamma: String,
    alpha: String,
    beta: String,
}

impl Serialize for ShapeParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRepr {
            n: exact::format_rational(&self.n),
            gamma: exact::format_rational(&self.gamma),
            alpha: exact::format_rational(&self.alpha),
            beta: exact::format_rational(&self.beta),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShapeParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ParamsRepr::deserialize(d)?;
        ShapeParams::parse(&r.n, &r.gamma, &r.alpha, &r.beta).map_err(serde::de::Error::custom)
    }
}
