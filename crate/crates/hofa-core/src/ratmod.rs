//! Exact rational arithmetic modulo one.
//!
//! Every fractional part in this crate uses the signed window `(-1/2, 1/2]`:
//! `{x} = x - [x]` where `[x]` is the integer nearest to `x`, rounding halves
//! down so that `{1/2} = 1/2`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always stored reduced with positive denominator.
pub type ExactRational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatmodError {
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// `n/d` as an exact rational. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> ExactRational {
    assert!(d != 0, "zero denominator");
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn big(n: &BigInt) -> ExactRational {
    BigRational::from_integer(n.clone())
}

/// Integer part `[x]`: the nearest integer, with halves rounded down.
pub fn int_part(x: &ExactRational) -> BigInt {
    // [x] = ceil(x - 1/2)
    let shifted = x - BigRational::new(BigInt::one(), BigInt::from(2));
    shifted.ceil().to_integer()
}

/// Fractional part `{x}` as a plain rational in `(-1/2, 1/2]`.
pub fn frac_q(x: &ExactRational) -> ExactRational {
    x - big(&int_part(x))
}

/// Fractional part `{x}`.
pub fn frac(x: &ExactRational) -> RationalMod1 {
    RationalMod1(frac_q(x))
}

/// Representative of `x` modulo one in `[0, 1)`.
pub fn frac_unsigned(x: &ExactRational) -> ExactRational {
    x - x.floor()
}

/// Distance from `x` to the nearest integer.
pub fn dist_circle(x: &ExactRational) -> ExactRational {
    frac_q(x).abs()
}

/// True when the reduced denominator of `x` divides `n`.
pub fn denominator_divides(x: &ExactRational, n: &BigInt) -> bool {
    (n % x.denom()).is_zero()
}

/// True when `x * n` is an integer, i.e. `x` is rational with denominator `n`.
pub fn has_denominator(x: &ExactRational, n: u64) -> bool {
    denominator_divides(x, &BigInt::from(n))
}

/// Rounds to the nearest `f64`.
pub fn to_f64(x: &ExactRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn parse_rational(s: &str) -> Result<ExactRational, RatmodError> {
    let t = s.trim();
    let bad = || RatmodError::Parse(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(RatmodError::ZeroDenominator);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(big(&BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

/// Canonical text form `p/q` (integers print as `p`).
pub fn format_rational(x: &ExactRational) -> String {
    x.to_string()
}

/// Deterministic trial-division primality test; fine for the moduli used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 2;
    }
    true
}

/// A residue in `(-1/2, 1/2]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalMod1(ExactRational);

impl RationalMod1 {
    pub fn new(x: &ExactRational) -> Self {
        frac(x)
    }

    pub fn zero() -> Self {
        RationalMod1(ExactRational::zero())
    }

    pub fn value(&self) -> &ExactRational {
        &self.0
    }

    pub fn into_inner(self) -> ExactRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }

    /// `e(x) = exp(2 pi i x)`.
    pub fn to_unit(&self) -> num_complex::Complex64 {
        let t = std::f64::consts::TAU * self.to_f64();
        num_complex::Complex64::new(t.cos(), t.sin())
    }
}

impl fmt::Display for RationalMod1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for &RationalMod1 {
    type Output = RationalMod1;
    fn add(self, rhs: &RationalMod1) -> RationalMod1 {
        frac(&(&self.0 + &rhs.0))
    }
}

impl Add for RationalMod1 {
    type Output = RationalMod1;
    fn add(self, rhs: RationalMod1) -> RationalMod1 {
        &self + &rhs
    }
}

impl Sub for &RationalMod1 {
    type Output = RationalMod1;
    fn sub(self, rhs: &RationalMod1) -> RationalMod1 {
        frac(&(&self.0 - &rhs.0))
    }
}

impl Sub for RationalMod1 {
    type Output = RationalMod1;
    fn sub(self, rhs: RationalMod1) -> RationalMod1 {
        &self - &rhs
    }
}

impl Neg for RationalMod1 {
    type Output = RationalMod1;
    fn neg(self) -> RationalMod1 {
        frac(&-self.0)
    }
}

/// Polynomial `sum_i c_i n^i` with exact coefficients in the monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExactPolynomial {
    coeffs: Vec<ExactRational>,
}

impl ExactPolynomial {
    pub fn new(mut coeffs: Vec<ExactRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ExactPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        ExactPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: ExactRational) -> Self {
        Self::new(vec![c])
    }

    /// `c n^k`.
    pub fn monomial(c: ExactRational, k: usize) -> Self {
        let mut v = vec![ExactRational::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[ExactRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> ExactRational {
        self.coeffs.get(i).cloned().unwrap_or_else(ExactRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, n: &ExactRational) -> ExactRational {
        let mut acc = ExactRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    pub fn eval_int(&self, n: i64) -> ExactRational {
        self.eval(&int(n))
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, s: &ExactRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![ExactRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `n -> p(c n)`.
    pub fn dilate(&self, c: &ExactRational) -> Self {
        let mut pow = ExactRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &pow);
            pow *= c;
        }
        Self::new(out)
    }

    /// `n -> p(n + h)`.
    pub fn shift(&self, h: &ExactRational) -> Self {
        let lin = Self::new(vec![h.clone(), ExactRational::one()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::constant(c.clone()));
        }
        acc
    }

    /// Coefficients `b_i` with `p(n) = sum_i b_i * binom(n, i)`.
    pub fn to_binomial(&self) -> Vec<ExactRational> {
        // Newton forward differences at 0.
        let k = self.coeffs.len();
        let mut vals: Vec<ExactRational> = (0..k as i64).map(|n| self.eval_int(n)).collect();
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            out.push(vals[0].clone());
            vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    /// Inverse of [`ExactPolynomial::to_binomial`].
    pub fn from_binomial(b: &[ExactRational]) -> Self {
        let mut acc = Self::zero();
        let mut basis = Self::constant(ExactRational::one());
        for (i, c) in b.iter().enumerate() {
            acc = acc.add(&basis.scale(c));
            // binom(n, i+1) = binom(n, i) * (n - i) / (i + 1)
            let step = Self::new(vec![int(-(i as i64)), ExactRational::one()])
                .scale(&rat(1, i as i64 + 1));
            basis = basis.mul(&step);
        }
        acc
    }
}

impl serde::Serialize for ExactPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_q::vec::serialize(&self.coeffs, s)
    }
}

impl<'de> serde::Deserialize<'de> for ExactPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_q::vec::deserialize(d).map(ExactPolynomial::new)
    }
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})n"),
                _ => format!("({c})n^{i}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `sup_{i >= 1} N^i ||c_i||`; the constant term is ignored.
pub fn c_infty_norm(p: &ExactPolynomial, n: u64) -> ExactRational {
    let nn = big(&BigInt::from(n));
    let mut pow = ExactRational::one();
    let mut best = ExactRational::zero();
    for c in p.coeffs().iter().skip(1) {
        pow *= &nn;
        let v = &pow * dist_circle(c);
        if v > best {
            best = v;
        }
    }
    best
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a ExactRational>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Serde adapters storing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[ExactRational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ExactRational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(D::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_examples() {
        assert_eq!(frac(&rat(3, 4)).value(), &rat(-1, 4));
        assert_eq!(frac(&rat(1, 2)).value(), &rat(1, 2));
        assert_eq!(frac(&rat(-1, 2)).value(), &rat(1, 2));
        // -7/3 + 2 = -1/3 already lies in the window
        assert_eq!(frac(&rat(-7, 3)).value(), &rat(-1, 3));
        assert_eq!(int_part(&rat(5, 3)), BigInt::from(2));
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist_circle(&rat(2, 3)), rat(1, 3));
        assert_eq!(dist_circle(&int(5)), int(0));
        assert_eq!(dist_circle(&rat(1, 2)), rat(1, 2));
    }

    #[test]
    fn c_infty_examples() {
        for n in [2u64, 5, 31] {
            let p = ExactPolynomial::new(vec![int(0), rat(1, n as i64)]);
            assert_eq!(c_infty_norm(&p, n), int(1));
        }
        let p = ExactPolynomial::new(vec![int(7), int(3), int(5)]);
        assert_eq!(c_infty_norm(&p, 13), int(0));
        let p = ExactPolynomial::new(vec![int(0), int(0), rat(1, 10)]);
        // 25 * ||1/10||, by hand
        assert_eq!(c_infty_norm(&p, 5), rat(5, 2));
        assert_eq!(c_infty_norm(&ExactPolynomial::constant(rat(1, 3)), 9), int(0));
        // n/1 has an integer coefficient
        assert_eq!(c_infty_norm(&ExactPolynomial::new(vec![int(0), int(1)]), 1), int(0));
    }

    #[test]
    fn binomial_round_trip() {
        let p = ExactPolynomial::new(vec![rat(1, 3), rat(-2, 5), rat(7, 2), int(4)]);
        let b = p.to_binomial();
        assert_eq!(ExactPolynomial::from_binomial(&b), p);
        // n^2 = 2 binom(n,2) + binom(n,1)
        let sq = ExactPolynomial::monomial(int(1), 2);
        assert_eq!(sq.to_binomial(), vec![int(0), int(1), int(2)]);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational(" -6/8 ").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("12").unwrap(), int(12));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(10, -4)), "-5/2");
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(211) && is_prime(509) && !is_prime(221));
    }

    #[test]
    fn shift_and_dilate() {
        let p = ExactPolynomial::new(vec![int(1), int(2), int(3)]);
        for n in -3..4 {
            assert_eq!(p.shift(&int(2)).eval_int(n), p.eval_int(n + 2));
            assert_eq!(p.dilate(&int(2)).eval_int(n), p.eval_int(2 * n));
        }
    }
}
