//! Exact rational numbers.
//!
//! Every quota, α-value, load, budget and price in this crate is a
//! [`Rational`]. Values are kept in lowest terms with a positive denominator,
//! and the textual form is always `p/q` (integers render as `p/1`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer / denom`, reduced. Panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(value: i64) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn from_usize(value: usize) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    /// `numer / denom` for counts, the common case when building α-values.
    pub fn ratio(numer: usize, denom: usize) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn ratio_u128(numer: u128, denom: u128) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Self) -> Self {
        Rational((&self.0 + &other.0) / BigRational::from_integer(2.into()))
    }

    /// The rational with the smallest denominator in the half-open interval
    /// `(lo, hi]`, found by walking the Stern–Brocot tree. Requires
    /// `0 <= lo < hi`.
    pub fn simplest_in(lo: &Rational, hi: &Rational) -> Rational {
        assert!(!lo.is_negative() && lo < hi, "simplest_in requires 0 <= lo < hi");
        simplest_between(&lo.0, &hi.0)
    }

    /// Compares `a / b` against `c / d` for non-negative counts without
    /// allocating.
    pub fn cmp_counts(a: usize, b: usize, c: usize, d: usize) -> Ordering {
        ((a as u128) * (d as u128)).cmp(&((c as u128) * (b as u128)))
    }
}

// Smallest-denominator rational x with lo < x <= hi, for 0 <= lo < hi.
fn simplest_between(lo: &BigRational, hi: &BigRational) -> Rational {
    let fl = lo.floor();
    // An integer in (lo, hi]?
    let candidate = &fl + BigRational::one();
    if candidate <= *hi {
        return Rational(candidate);
    }
    // Both lie in [fl, fl + 1). Recurse on reciprocals of the fractional parts:
    // lo < x <= hi  <=>  1/(hi - fl) <= 1/(x - fl) < 1/(lo - fl).
    let lo_frac = lo - &fl;
    let hi_frac = hi - &fl;
    let inv_hi = hi_frac.recip();
    let inner = if lo_frac.is_zero() {
        // 1/(x - fl) ranges over [inv_hi, ∞): the smallest integer >= inv_hi.
        BigRational::from_integer(inv_hi.ceil().to_integer())
    } else {
        let inv_lo = lo_frac.recip();
        simplest_closed_open(&inv_hi, &inv_lo)
    };
    Rational(fl + inner.recip())
}

// Smallest-denominator rational y with lo <= y < hi, for 0 < lo < hi.
fn simplest_closed_open(lo: &BigRational, hi: &BigRational) -> BigRational {
    let c = lo.ceil();
    if c < *hi {
        return c;
    }
    let fl = lo.floor();
    let lo_frac = lo - &fl;
    let hi_frac = hi - &fl;
    // lo <= y < hi  <=>  1/(hi - fl) < 1/(y - fl) <= 1/(lo - fl)
    let inner = simplest_between(&hi_frac.recip(), &lo_frac.recip());
    fl + inner.0.recip()
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{0}`: expected `p/q` or an integer")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| err())?;
                let q: BigInt = q.trim().parse().map_err(|_| err())?;
                if q.is_zero() {
                    return Err(err());
                }
                Ok(Rational(BigRational::new(p, q)))
            }
            None => {
                let p: BigInt = t.parse().map_err(|_| err())?;
                Ok(Rational(BigRational::from_integer(p)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<usize> for Rational {
    fn from(value: usize) -> Self {
        Rational::from_usize(value)
    }
}

/// Harmonic number `H(t) = 1 + 1/2 + ... + 1/t`, with `H(0) = 0`.
pub fn harmonic(t: usize) -> Rational {
    (1..=t).map(|j| Rational::ratio(1, j)).sum()
}

/// Least common multiple of `1..=k` (1 for `k = 0`).
pub fn lcm_upto(k: usize) -> u128 {
    (1..=k as u128).fold(1u128, |acc, j| acc.lcm(&j))
}
