//! Exact arithmetic over the rationals and real quadratic fields `Q(sqrt(D))`.
//!
//! Every value is kept in canonical form, so two [`FieldElem`]s are equal
//! exactly when they are structurally equal. Orbit computations rely on this
//! to detect cycles by hashing.

mod order;
mod text;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use order::isqrt;

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Default bound for the trial division that certifies `D` squarefree.
pub const DEFAULT_SQUAREFREE_BOUND: u64 = 1_000_000;

/// `(a + b*sqrt(d)) / c` with `d >= 2` squarefree, `b != 0`, `c > 0` and
/// `gcd(a, b, c) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

impl QuadraticIrrational {
    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn discriminant(&self) -> u64 {
        self.d
    }
}

/// An exact real number: rational, or quadratic irrational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Rational(Rational),
    Quadratic(QuadraticIrrational),
}

/// Splits `d` into `(s, core)` with `d = s^2 * core` and `core` squarefree.
///
/// Trial division runs up to `bound`; if the remaining cofactor cannot be
/// certified squarefree with that bound the discriminant is rejected.
pub fn squarefree_decompose(d: u64, bound: u64) -> Result<(u64, u64)> {
    if d == 0 {
        return Ok((0, 0));
    }
    let mut rest = d;
    let mut square = 1u64;
    let mut core = 1u64;
    let mut p = 2u64;
    while p <= bound && p.saturating_mul(p) <= rest {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= p;
        }
        if e % 2 == 1 {
            core *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        // All prime factors of `rest` exceed the last trial divisor.
        let r = (rest as f64).sqrt() as u64;
        let root = (r.saturating_sub(1)..=r + 1).find(|x| x.checked_mul(*x) == Some(rest));
        if let Some(root) = root {
            square *= root;
        } else if p.saturating_mul(p) <= rest && p.saturating_mul(p).saturating_mul(p) <= rest {
            // Could still hide a square of a prime larger than the bound.
            return Err(Error::DiscriminantTooLarge(d));
        } else {
            core *= rest;
        }
    }
    Ok((square, core))
}

fn check_d(x: Option<u64>, y: Option<u64>) -> Result<Option<u64>> {
    match (x, y) {
        (Some(a), Some(b)) if a != b => Err(Error::MixedDiscriminants(a, b)),
        (Some(a), _) | (_, Some(a)) => Ok(Some(a)),
        (None, None) => Ok(None),
    }
}

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem::Rational(Rational::zero())
    }

    pub fn one() -> Self {
        FieldElem::Rational(Rational::one())
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        FieldElem::Rational(Rational::from_integer(n.into()))
    }

    /// `num / den`; panics if `den` is zero.
    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        FieldElem::Rational(Rational::new(num.into(), den.into()))
    }

    /// Builds `(a + b*sqrt(d)) / c` in canonical form, extracting square
    /// factors of `d` and collapsing to a rational where possible.
    pub fn quadratic(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: u64,
    ) -> Result<Self> {
        Self::quadratic_with_bound(a, b, c, d, DEFAULT_SQUAREFREE_BOUND)
    }

    pub fn quadratic_with_bound(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: u64,
        bound: u64,
    ) -> Result<Self> {
        let (a, b, c) = (a.into(), b.into(), c.into());
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (s, core) = squarefree_decompose(d, bound)?;
        let x = Rational::new(a, c.clone());
        if core <= 1 {
            let y = Rational::new(b * BigInt::from(s), c);
            return Ok(FieldElem::Rational(x + y));
        }
        let y = Rational::new(b * BigInt::from(s), c);
        Ok(Self::from_parts(x, y, Some(core)))
    }

    /// The positive root `(p + sqrt(p^2 + 4q)) / 2` of `x^2 = p x + q`.
    pub fn positive_root(p: i64, q: i64) -> Result<Self> {
        let disc = p * p + 4 * q;
        if disc < 0 {
            return Err(Error::InvalidArgument(format!(
                "x^2 = {p}x + {q} has no real root"
            )));
        }
        Self::quadratic(p, 1, 2, disc as u64)
    }

    /// `x + y*sqrt(d)` in canonical form.
    pub(crate) fn from_parts(x: Rational, y: Rational, d: Option<u64>) -> Self {
        let d = match d {
            Some(d) if !y.is_zero() => d,
            _ => return FieldElem::Rational(x),
        };
        let c = x.denom().lcm(y.denom());
        let mut a = x.numer() * (&c / x.denom());
        let mut b = y.numer() * (&c / y.denom());
        let mut c = c;
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        FieldElem::Quadratic(QuadraticIrrational { a, b, c, d })
    }

    /// Decomposes into `(x, y, d)` with value `x + y*sqrt(d)`.
    pub(crate) fn parts(&self) -> (Rational, Rational, Option<u64>) {
        match self {
            FieldElem::Rational(r) => (r.clone(), Rational::zero(), None),
            FieldElem::Quadratic(q) => (
                Rational::new(q.a.clone(), q.c.clone()),
                Rational::new(q.b.clone(), q.c.clone()),
                Some(q.d),
            ),
        }
    }

    pub fn discriminant(&self) -> Option<u64> {
        match self {
            FieldElem::Rational(_) => None,
            FieldElem::Quadratic(q) => Some(q.d),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            FieldElem::Rational(r) => Some(r),
            FieldElem::Quadratic(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, FieldElem::Rational(_))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, FieldElem::Rational(r) if r.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldElem::Rational(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, FieldElem::Rational(r) if r.is_one())
    }

    /// Fails with [`Error::MixedDiscriminants`] unless both operands share a field.
    pub fn compatible(&self, other: &FieldElem) -> Result<Option<u64>> {
        check_d(self.discriminant(), other.discriminant())
    }

    pub fn checked_add(&self, other: &FieldElem) -> Result<FieldElem> {
        let d = self.compatible(other)?;
        let (x1, y1, _) = self.parts();
        let (x2, y2, _) = other.parts();
        Ok(Self::from_parts(x1 + x2, y1 + y2, d))
    }

    pub fn checked_sub(&self, other: &FieldElem) -> Result<FieldElem> {
        let d = self.compatible(other)?;
        let (x1, y1, _) = self.parts();
        let (x2, y2, _) = other.parts();
        Ok(Self::from_parts(x1 - x2, y1 - y2, d))
    }

    pub fn checked_mul(&self, other: &FieldElem) -> Result<FieldElem> {
        let d = self.compatible(other)?;
        if let (FieldElem::Rational(a), FieldElem::Rational(b)) = (self, other) {
            return Ok(FieldElem::Rational(a * b));
        }
        let (x1, y1, _) = self.parts();
        let (x2, y2, _) = other.parts();
        let dd = Rational::from_integer(BigInt::from(d.unwrap_or(0)));
        let x = &x1 * &x2 + &y1 * &y2 * dd;
        let y = x1 * y2 + x2 * y1;
        Ok(Self::from_parts(x, y, d))
    }

    pub fn checked_div(&self, other: &FieldElem) -> Result<FieldElem> {
        let d = self.compatible(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let (FieldElem::Rational(a), FieldElem::Rational(b)) = (self, other) {
            return Ok(FieldElem::Rational(a / b));
        }
        let (x1, y1, _) = self.parts();
        let (x2, y2, _) = other.parts();
        let dd = Rational::from_integer(BigInt::from(d.unwrap_or(0)));
        // Multiply through by the conjugate of the divisor.
        let norm = &x2 * &x2 - &y2 * &y2 * &dd;
        let x = (&x1 * &x2 - &y1 * &y2 * &dd) / &norm;
        let y = (y1 * x2 - x1 * y2) / norm;
        Ok(Self::from_parts(x, y, d))
    }

    pub fn recip(&self) -> Result<FieldElem> {
        FieldElem::one().checked_div(self)
    }

    /// Galois conjugate `(a - b*sqrt(d)) / c`; rationals are fixed.
    pub fn conjugate(&self) -> FieldElem {
        match self {
            FieldElem::Rational(_) => self.clone(),
            FieldElem::Quadratic(q) => FieldElem::Quadratic(QuadraticIrrational {
                a: q.a.clone(),
                b: -q.b.clone(),
                c: q.c.clone(),
                d: q.d,
            }),
        }
    }

    pub fn pow(&self, exp: u32) -> FieldElem {
        let mut acc = FieldElem::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn signum(&self) -> i32 {
        match self.cmp(&FieldElem::zero()) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        }
    }

    pub fn abs(&self) -> FieldElem {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Nearest `f64`, accurate to roughly 2^-90 relative to the magnitude.
    pub fn to_f64(&self) -> f64 {
        match self {
            FieldElem::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            FieldElem::Quadratic(_) => {
                let scale = BigInt::one() << 96u32;
                let scaled = self * &FieldElem::from_int(scale.clone());
                let fl = scaled.floor();
                fl.to_f64().unwrap_or(f64::NAN) / scale.to_f64().unwrap()
            }
        }
    }

    /// Returns `(p, q)` with `p >= q >= 1` and `beta^2 = p*beta + q`, if any.
    ///
    /// Rational inputs never qualify: a rational root of a monic integer
    /// quadratic is an integer, and integers `n >= 2` force `q > p`.
    pub fn hw_condition(&self) -> Option<(BigInt, BigInt)> {
        let q = match self {
            FieldElem::Rational(_) => return None,
            FieldElem::Quadratic(q) => q,
        };
        // Minimal polynomial x^2 - (2a/c) x + (a^2 - b^2 d)/c^2.
        let c = &q.c;
        let two_a = BigInt::from(2) * &q.a;
        if !two_a.is_multiple_of(c) {
            return None;
        }
        let p = &two_a / c;
        let c2 = c * c;
        let constant = &q.a * &q.a - &q.b * &q.b * BigInt::from(q.d);
        if !constant.is_multiple_of(&c2) {
            return None;
        }
        let qq = -(constant / c2);
        if qq >= BigInt::one() && p >= qq {
            Some((p, qq))
        } else {
            None
        }
    }
}

impl Default for FieldElem {
    fn default() -> Self {
        FieldElem::zero()
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::from_int(n)
    }
}

impl From<Rational> for FieldElem {
    fn from(r: Rational) -> Self {
        FieldElem::Rational(r)
    }
}

impl From<BigInt> for FieldElem {
    fn from(n: BigInt) -> Self {
        FieldElem::from_int(n)
    }
}

// Operator impls panic on mixed discriminants or division by zero, the same
// way integer division panics; use the `checked_*` methods at API borders.
macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}: {e}", stringify!($method)),
                }
            }
        }
        impl $trait<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                (&self).$method(rhs)
            }
        }
        impl $trait<FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        match self {
            FieldElem::Rational(r) => FieldElem::Rational(-r),
            FieldElem::Quadratic(q) => FieldElem::Quadratic(QuadraticIrrational {
                a: -q.a.clone(),
                b: -q.b.clone(),
                c: q.c.clone(),
                d: q.d,
            }),
        }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format(self))
    }
}

impl std::str::FromStr for FieldElem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        text::parse(s)
    }
}

impl serde::Serialize for FieldElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for FieldElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Absolute value helper used when formatting.
pub(crate) fn big_abs(x: &BigInt) -> BigInt {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    #[test]
    fn rational_cancellation() {
        assert_eq!(q("3/2") * q("4/3"), FieldElem::from_int(2));
    }

    #[test]
    fn integer_shift_of_quadratic() {
        let x = FieldElem::quadratic(3, 1, 2, 13).unwrap();
        let expect = FieldElem::quadratic(-3, 1, 2, 13).unwrap();
        assert_eq!(&x - &FieldElem::from_int(3), expect);
    }

    #[test]
    fn conjugate_product_is_norm() {
        let x = FieldElem::quadratic(3, 1, 2, 13).unwrap();
        assert_eq!(&x * &x.conjugate(), FieldElem::from_int(-1));
    }

    #[test]
    fn square_factors_are_extracted() {
        // sqrt(52) = 2 sqrt(13)
        let x = FieldElem::quadratic(6, 1, 4, 52).unwrap();
        assert_eq!(x, FieldElem::quadratic(3, 1, 2, 13).unwrap());
        assert_eq!(FieldElem::quadratic(1, 2, 3, 9).unwrap(), q("7/3"));
    }

    #[test]
    fn mixed_discriminants_rejected() {
        let x = FieldElem::quadratic(0, 1, 1, 2).unwrap();
        let y = FieldElem::quadratic(0, 1, 1, 3).unwrap();
        assert_eq!(x.checked_add(&y), Err(Error::MixedDiscriminants(2, 3)));
        assert!(x.checked_mul(&q("5/7")).is_ok());
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(
            q("1/2").checked_div(&FieldElem::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn division_by_quadratic() {
        let beta = FieldElem::quadratic(3, 1, 4, 13).unwrap();
        let inv = beta.recip().unwrap();
        assert_eq!(&beta * &inv, FieldElem::one());
        // 4 / (3 + sqrt 13) = (sqrt 13 - 3) / 1
        assert_eq!(inv, FieldElem::quadratic(-3, 1, 1, 13).unwrap());
    }

    #[test]
    fn hw_condition_examples() {
        let golden = FieldElem::quadratic(1, 1, 2, 5).unwrap();
        assert_eq!(golden.hw_condition(), Some((1.into(), 1.into())));
        assert_eq!(q("7/3").hw_condition(), None);
        let b = FieldElem::quadratic(3, 1, 2, 13).unwrap();
        assert_eq!(b.hw_condition(), Some((3.into(), 1.into())));
        // x^2 = x + 3 has p < q.
        assert_eq!(FieldElem::positive_root(1, 3).unwrap().hw_condition(), None);
    }

    #[test]
    fn squarefree_bound() {
        assert_eq!(squarefree_decompose(12, 10).unwrap(), (2, 3));
        assert_eq!(
            squarefree_decompose(1_000_003 * 1_000_003, 1_000_000)
                .unwrap()
                .1,
            1
        );
        assert!(squarefree_decompose(1_000_003 * 1_000_033 * 1_000_037, 1_000_000).is_err());
    }

    #[test]
    fn to_f64_quadratic() {
        let golden = FieldElem::quadratic(1, 1, 2, 5).unwrap();
        assert!((golden.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }
}
