//! Exact polynomials: dense univariate [`RationalPoly`] and sparse
//! [`TrivariatePoly`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{self, Rational};

/// Dense polynomial in `x` with exact rational coefficients; index = power of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coeffs: Vec<Rational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> Rational {
        self.coeffs.get(power).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + exact::to_f64(c))
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Coefficients as `"num/den"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(exact::format_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> crate::Result<Self> {
        items
            .iter()
            .map(|s| exact::parse_rational(s.as_ref()))
            .collect::<crate::Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = exact::format_rational(&c.abs());
            match i {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*x")?,
                _ => write!(f, "{a}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        RationalPoly::from_strings(&v).map_err(serde::de::Error::custom)
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Exponent triple `(x, y, z)` of a [`TrivariatePoly`] monomial.
pub type Exponents = (usize, usize, usize);

/// Sparse polynomial in three variables over exact rationals.
///
/// The variables are positional. The S/Q machinery in [`crate::basis`] uses
/// `(x, k, n)` for the raw derivative recursion and `(x, w, n)` with
/// `w = k - n x` after substitution.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TrivariatePoly {
    terms: BTreeMap<Exponents, Rational>,
}

impl TrivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial((0, 0, 0), Rational::one())
    }

    pub fn monomial(e: Exponents, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn add_term(&mut self, e: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: Exponents) -> Rational {
        self.terms.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    /// Partial derivative with respect to variable 0, 1 or 2.
    pub fn partial(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (&(a, b, c), coef) in &self.terms {
            let (power, lowered) = match var {
                0 => (a, (a.wrapping_sub(1), b, c)),
                1 => (b, (a, b.wrapping_sub(1), c)),
                2 => (c, (a, b, c.wrapping_sub(1))),
                _ => panic!("variable index {var} out of range"),
            };
            if power > 0 {
                out.add_term(lowered, coef * Rational::from_integer(power.into()));
            }
        }
        out
    }

    pub fn eval(&self, x: &Rational, y: &Rational, z: &Rational) -> Rational {
        self.terms
            .iter()
            .map(|(&(a, b, c), coef)| coef * exact::pow(x, a) * exact::pow(y, b) * exact::pow(z, c))
            .sum()
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Substitutes variable 1 by `replacement`, itself a trivariate polynomial.
    pub fn substitute_y(&self, replacement: &TrivariatePoly) -> Self {
        let mut out = Self::zero();
        let max_b = self.terms.keys().map(|e| e.1).max().unwrap_or(0);
        let powers: Vec<TrivariatePoly> = (0..=max_b)
            .scan(Self::one(), |acc, _| {
                let cur = acc.clone();
                *acc = &*acc * replacement;
                Some(cur)
            })
            .collect();
        for (&(a, b, c), coef) in &self.terms {
            let factor = Self::monomial((a, 0, c), coef.clone());
            out = &out + &(&factor * &powers[b]);
        }
        out
    }
}

impl Add for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn add(self, rhs: &TrivariatePoly) -> TrivariatePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn sub(self, rhs: &TrivariatePoly) -> TrivariatePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn mul(self, rhs: &TrivariatePoly) -> TrivariatePoly {
        let mut out = TrivariatePoly::zero();
        for (&(a1, b1, c1), x) in &self.terms {
            for (&(a2, b2, c2), y) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2, c1 + c2), x * y);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn trailing_zeros_are_stripped() {
        let p = RationalPoly::new(vec![int(1), int(0), int(0)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(RationalPoly::new(vec![int(0)]).degree(), None);
    }

    #[test]
    fn derivative_and_eval() {
        // 1 + 2x + 3x^2
        let p = RationalPoly::new(vec![int(1), int(2), int(3)]);
        assert_eq!(p.derivative(), RationalPoly::new(vec![int(2), int(6)]));
        assert_eq!(p.eval(&rat(1, 2)), rat(11, 4));
        assert!((p.eval_f64(0.5) - 2.75).abs() < 1e-15);
        assert_eq!(p.to_string(), "1 + 2*x + 3*x^2");
    }

    #[test]
    fn product_of_binomials() {
        let a = RationalPoly::new(vec![int(1), int(1)]);
        assert_eq!(a.pow(3), RationalPoly::new(vec![int(1), int(3), int(3), int(1)]));
        assert_eq!(&a - &a, RationalPoly::zero());
    }

    #[test]
    fn json_uses_fraction_strings() {
        let p = RationalPoly::new(vec![int(0), rat(2, 15), rat(2, 15)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["0","2/15","2/15"]"#);
        let back: RationalPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn trivariate_never_stores_zeros() {
        let mut t = TrivariatePoly::monomial((1, 0, 0), int(2));
        t.add_term((1, 0, 0), int(-2));
        assert!(t.is_empty());
    }

    #[test]
    fn substitution_shifts_variable() {
        // y^2 with y := w + x z  (same slot reused for w)
        let y2 = TrivariatePoly::monomial((0, 2, 0), int(1));
        let repl = &TrivariatePoly::monomial((0, 1, 0), int(1)) + &TrivariatePoly::monomial((1, 0, 1), int(1));
        let s = y2.substitute_y(&repl);
        assert_eq!(s.coeff((0, 2, 0)), int(1));
        assert_eq!(s.coeff((1, 1, 1)), int(2));
        assert_eq!(s.coeff((2, 0, 2)), int(1));
        assert_eq!(s.len(), 3);
    }
}
