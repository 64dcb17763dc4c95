//! Coefficient rings for Laurent polynomials.
//!
//! Two instances exist: exact [`Rational`] values, and [`Interval`]
//! enclosures with rational endpoints. Interval arithmetic over exact
//! rationals needs no rounding, so every enclosure produced here is exact
//! interval arithmetic on its endpoints.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parse `"num/den"` or a bare integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Canonical `"num/den"` rendering (the denominator is always present).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// The operations the polynomial and matrix layers need from a coefficient.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(q: Rational) -> Self;
    fn magnitude(&self) -> Self;
    /// Exact: `self == 0`. Enclosure: `0` lies in the enclosure.
    fn admits_zero(&self) -> bool;
    /// Certainly strictly positive.
    fn certainly_positive(&self) -> bool;
    fn lower(&self) -> Rational;
    fn upper(&self) -> Rational;
    fn to_json(&self) -> Value;

    fn width(&self) -> Rational {
        self.upper() - self.lower()
    }

    /// True when `other` is a possible value of `self`.
    fn admits(&self, other: &Rational) -> bool {
        self.lower() <= *other && *other <= self.upper()
    }
}

impl Scalar for Rational {
    fn from_rational(q: Rational) -> Self {
        q
    }
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
    fn admits_zero(&self) -> bool {
        self.is_zero()
    }
    fn certainly_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn lower(&self) -> Rational {
        self.clone()
    }
    fn upper(&self) -> Rational {
        self.clone()
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
}

/// A closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "interval endpoints out of order: [{}, {}]",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Interval spanning two points in either order.
    pub fn hull(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rat(2, 1)
    }

    /// Division; the divisor must exclude zero.
    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval> {
        if rhs.admits_zero() {
            return Err(Error::InvalidParameter(
                "interval division by an enclosure containing 0".into(),
            ));
        }
        let inv = Interval::hull(rhs.hi.recip(), rhs.lo.recip());
        Ok(self.clone() * inv)
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        Interval::hull(&self.lo * k, &self.hi * k)
    }

    /// `Less` if certainly below `q`, `Greater` if certainly above, `Equal`
    /// when `q` is inside the enclosure.
    pub fn compare_to(&self, q: &Rational) -> Ordering {
        if self.hi < *q {
            Ordering::Less
        } else if self.lo > *q {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = products.iter().min().cloned().unwrap();
        let hi = products.iter().max().cloned().unwrap();
        Interval { lo, hi }
    }
}

impl Zero for Interval {
    fn zero() -> Self {
        Interval::point(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

impl One for Interval {
    fn one() -> Self {
        Interval::point(Rational::one())
    }
}

impl Scalar for Interval {
    fn from_rational(q: Rational) -> Self {
        Interval::point(q)
    }
    fn magnitude(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !Signed::is_positive(&self.hi) {
            -self.clone()
        } else {
            let m = std::cmp::max(-self.lo.clone(), self.hi.clone());
            Interval {
                lo: Rational::zero(),
                hi: m,
            }
        }
    }
    fn admits_zero(&self) -> bool {
        !Signed::is_positive(&self.lo) && !self.hi.is_negative()
    }
    fn certainly_positive(&self) -> bool {
        Signed::is_positive(&self.lo)
    }
    fn lower(&self) -> Rational {
        self.lo.clone()
    }
    fn upper(&self) -> Rational {
        self.hi.clone()
    }
    fn to_json(&self) -> Value {
        json!({ "lo": format_rational(&self.lo), "hi": format_rational(&self.hi) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(format_rational(&rat(7, 1)), "7/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn interval_mul_sign_cases() {
        let a = Interval::new(rat(-1, 1), rat(2, 1)).unwrap();
        let b = Interval::new(rat(-3, 1), rat(1, 1)).unwrap();
        let p = a * b;
        assert_eq!(p.lo(), &rat(-6, 1));
        assert_eq!(p.hi(), &rat(3, 1));
    }

    #[test]
    fn interval_abs_straddling_zero() {
        let a = Interval::new(rat(-3, 1), rat(2, 1)).unwrap();
        assert_eq!(a.magnitude(), Interval::new(rat(0, 1), rat(3, 1)).unwrap());
        assert!(a.admits_zero());
        assert!(!a.certainly_positive());
    }

    #[test]
    fn interval_division_rejects_zero() {
        let a = Interval::point(rat(1, 1));
        let z = Interval::new(rat(-1, 1), rat(1, 1)).unwrap();
        assert!(a.checked_div(&z).is_err());
        let d = Interval::new(rat(2, 1), rat(4, 1)).unwrap();
        assert_eq!(
            a.checked_div(&d).unwrap(),
            Interval::new(rat(1, 4), rat(1, 2)).unwrap()
        );
    }

    #[test]
    fn reversed_endpoints_rejected() {
        assert!(Interval::new(rat(1, 1), rat(0, 1)).is_err());
    }
}
