use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{Map, Value};

use super::scalar::{parse_rational, Rational, Scalar};
use crate::error::{Error, Result};

/// A sparse Laurent polynomial `Σ c_k x^k` with arbitrary-precision
/// exponents. Zero coefficients are never stored, so structural equality is
/// polynomial equality.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<C = Rational> {
    terms: BTreeMap<BigInt, C>,
}

impl<C: Scalar> LaurentPoly<C> {
    pub fn zero() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(BigInt::zero(), c)
    }

    pub fn monomial(exp: impl Into<BigInt>, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp.into(), c);
        }
        LaurentPoly { terms }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I, E>(iter: I) -> Self
    where
        I: IntoIterator<Item = (E, C)>,
        E: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in iter {
            p.add_term(e.into(), c);
        }
        p
    }

    pub fn add_term(&mut self, exp: BigInt, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                let sum = v.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *v = sum;
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigInt, &C)> {
        self.terms.iter()
    }

    pub fn exponents(&self) -> impl Iterator<Item = &BigInt> {
        self.terms.keys()
    }

    /// The coefficient `(f, x^k)`.
    pub fn coeff(&self, exp: &BigInt) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    pub fn min_exponent(&self) -> Option<&BigInt> {
        self.terms.keys().next()
    }

    pub fn max_exponent(&self) -> Option<&BigInt> {
        self.terms.keys().next_back()
    }

    pub fn scale(&self, k: &C) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), c.clone() * k.clone())),
        )
    }

    /// Multiplication by `x^shift` (the ℤ-action).
    pub fn shift(&self, shift: &BigInt) -> Self {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + shift, c.clone()))
                .collect(),
        }
    }

    /// Value at `x = 1`: the sum of the coefficients.
    pub fn eval_at_one(&self) -> C {
        self.terms
            .values()
            .fold(C::zero(), |acc, c| acc + c.clone())
    }

    /// `Σ_k |(f, x^k)|`.
    pub fn one_norm(&self) -> C {
        self.terms
            .values()
            .fold(C::zero(), |acc, c| acc + c.magnitude())
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.terms.values().all(|c| c.lower() >= Rational::zero())
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> LaurentPoly<D> {
        LaurentPoly::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    /// `{"<exponent>": <coefficient>, …}` with decimal exponent keys.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (e, c) in &self.terms {
            m.insert(e.to_string(), c.to_json());
        }
        Value::Object(m)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl LaurentPoly<Rational> {
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("Laurent polynomial must be a JSON object".into()))?;
        let mut p = Self::zero();
        for (k, c) in obj {
            let e: BigInt = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent {k:?}")))?;
            let c = c
                .as_str()
                .ok_or_else(|| Error::Parse(format!("coefficient of x^{k} must be a string")))?;
            p.add_term(e, parse_rational(c)?);
        }
        Ok(p)
    }
}

impl<C: Scalar> Default for LaurentPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Scalar> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}·x^{}", c.to_json(), e)?;
        }
        Ok(())
    }
}

impl<C: Scalar> Add<&LaurentPoly<C>> for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn add(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Scalar> Sub<&LaurentPoly<C>> for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn sub(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<C: Scalar> Mul<&LaurentPoly<C>> for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn mul(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        self.mul_ref(rhs)
    }
}

impl<C: Scalar> Neg for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn neg(self) -> LaurentPoly<C> {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Scalar> $tr<LaurentPoly<C>> for LaurentPoly<C> {
            type Output = LaurentPoly<C>;
            fn $m(self, rhs: LaurentPoly<C>) -> LaurentPoly<C> {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::scalar::rat;

    fn p(terms: &[(i64, i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().map(|&(e, n, d)| (e, rat(n, d))))
    }

    #[test]
    fn square_of_one_plus_x() {
        let f = p(&[(0, 1, 1), (1, 1, 1)]);
        assert_eq!(&f * &f, p(&[(0, 1, 1), (1, 2, 1), (2, 1, 1)]));
    }

    #[test]
    fn odometer_telescoping_step() {
        let a = p(&[(0, 1, 2), (1, 1, 2)]);
        let b = p(&[(0, 1, 2), (2, 1, 2)]);
        assert_eq!(&a * &b, p(&[(0, 1, 4), (1, 1, 4), (2, 1, 4), (3, 1, 4)]));
    }

    #[test]
    fn multiplicative_identity() {
        let f = p(&[(-3, 2, 5), (4, -1, 7)]);
        assert_eq!(&f * &LaurentPoly::one(), f);
    }

    #[test]
    fn cancellation_drops_terms() {
        let f = p(&[(2, 1, 3), (5, 1, 1)]);
        let g = p(&[(2, 1, 3)]);
        let d = &f - &f;
        assert!(d.is_zero());
        assert_eq!((&f - &g).len(), 1);
    }

    #[test]
    fn negative_and_huge_exponents() {
        let big: BigInt = BigInt::from(1u8) << 200;
        let f = LaurentPoly::monomial(big.clone(), rat(1, 2));
        let g = LaurentPoly::monomial(-big, rat(2, 1));
        assert_eq!(&f * &g, LaurentPoly::one());
    }

    #[test]
    fn json_roundtrip() {
        let f = p(&[(-1, 3, 4), (10, -1, 2)]);
        let v = f.to_json();
        assert_eq!(v["-1"], "3/4");
        assert_eq!(LaurentPoly::from_json(&v).unwrap(), f);
    }

    #[test]
    fn norms_and_evaluation() {
        let f = p(&[(0, 1, 1), (1, -1, 1)]);
        assert_eq!(f.eval_at_one(), rat(0, 1));
        assert_eq!(f.one_norm(), rat(2, 1));
        assert!(!f.has_nonnegative_coeffs());
    }
}
