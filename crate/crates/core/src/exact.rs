//! Exact rational helpers: parsing, formatting, factorial products and
//! Stirling-number tables.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.125"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = digits.split_once('.').unwrap_or((digits, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{ip}{fp}").parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(all);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators and denominators: scale both down by their bit lengths.
    let n = r.numer();
    let d = r.denom();
    let shift_n = n.bits().saturating_sub(60);
    let shift_d = d.bits().saturating_sub(60);
    let nf = (n >> shift_n).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift_d).to_f64().unwrap_or(f64::NAN);
    nf / df * 2f64.powi(shift_n as i32 - shift_d as i32)
}

/// Rising factorial a(a+1)...(a+len-1).
pub fn rising(a: &Rational, len: usize) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..len {
        acc *= &term;
        term += Rational::one();
    }
    acc
}

/// Falling factorial a(a-1)...(a-len+1).
pub fn falling(a: &Rational, len: usize) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..len {
        acc *= &term;
        term -= Rational::one();
    }
    acc
}

pub fn binomial(m: usize, j: usize) -> BigInt {
    if j > m {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..j {
        acc = acc * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn pow(r: &Rational, e: usize) -> Rational {
    num_traits::pow(r.clone(), e)
}

/// Serde adapter storing a rational as its `"num/den"` string.
pub mod as_string {
    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text: String = serde::Deserialize::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

const STIRLING_CACHE: usize = 12;

fn build_table(next: impl Fn(&[Vec<BigInt>], usize, usize) -> BigInt, size: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = Vec::with_capacity(size + 1);
    for m in 0..=size {
        let row = (0..=m)
            .map(|i| {
                if m == 0 {
                    BigInt::one()
                } else if i == 0 {
                    BigInt::zero()
                } else {
                    next(&t, m, i)
                }
            })
            .collect();
        t.push(row);
    }
    t
}

fn second_kind_table(size: usize) -> Vec<Vec<BigInt>> {
    build_table(
        |t, m, i| {
            let prev = &t[m - 1];
            let keep = prev.get(i).cloned().unwrap_or_default() * BigInt::from(i);
            keep + &prev[i - 1]
        },
        size,
    )
}

fn first_kind_table(size: usize) -> Vec<Vec<BigInt>> {
    build_table(
        |t, m, i| {
            let prev = &t[m - 1];
            let keep = prev.get(i).cloned().unwrap_or_default() * BigInt::from(m - 1);
            keep + &prev[i - 1]
        },
        size,
    )
}

fn cached(cell: &'static OnceLock<Vec<Vec<BigInt>>>, f: fn(usize) -> Vec<Vec<BigInt>>) -> &'static [Vec<BigInt>] {
    cell.get_or_init(|| f(STIRLING_CACHE))
}

/// Stirling number of the second kind S(m, i): k^m = Σ_i S(m, i) k^{(i)} (falling).
pub fn stirling2(m: usize, i: usize) -> BigInt {
    static CACHE: OnceLock<Vec<Vec<BigInt>>> = OnceLock::new();
    if m <= STIRLING_CACHE {
        return cached(&CACHE, second_kind_table)[m].get(i).cloned().unwrap_or_default();
    }
    second_kind_table(m)[m].get(i).cloned().unwrap_or_default()
}

/// Unsigned Stirling number of the first kind c(m, i): k^{(m) rising} = Σ_i c(m, i) k^i.
pub fn stirling1_unsigned(m: usize, i: usize) -> BigInt {
    static CACHE: OnceLock<Vec<Vec<BigInt>>> = OnceLock::new();
    if m <= STIRLING_CACHE {
        return cached(&CACHE, first_kind_table)[m].get(i).cloned().unwrap_or_default();
    }
    first_kind_table(m)[m].get(i).cloned().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_rational("2").unwrap(), int(2));
        assert_eq!(parse_rational("1.5e2").unwrap(), int(150));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn stirling_small_values() {
        // S(4, 2) = 7, c(4, 2) = 11
        assert_eq!(stirling2(4, 2), BigInt::from(7));
        assert_eq!(stirling1_unsigned(4, 2), BigInt::from(11));
        assert_eq!(stirling2(0, 0), BigInt::one());
        assert_eq!(stirling2(15, 1), BigInt::one());
    }

    #[test]
    fn rising_via_stirling_matches_direct_product() {
        let k = rat(7, 3);
        for m in 0..8 {
            let via: Rational = (0..=m)
                .map(|i| Rational::from_integer(stirling1_unsigned(m, i)) * pow(&k, i))
                .sum();
            assert_eq!(via, rising(&k, m));
            let back: Rational = (0..=m)
                .map(|i| Rational::from_integer(stirling2(m, i)) * falling(&k, i))
                .sum();
            assert_eq!(back, pow(&k, m));
        }
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 399));
        assert!((to_f64(&big) - 10.0).abs() < 1e-12);
    }
}
