//! Exact order and floor for quadratic irrationals, using integer arithmetic only.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed};

use super::{FieldElem, Rational};
use crate::error::Result;

/// Integer square root of a non-negative integer; panics on negative input.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of a negative number");
    n.sqrt()
}

/// Sign of `u + v*sqrt(d)` for integers `u`, `v` and non-square `d`.
fn sign_of(u: &BigInt, v: &BigInt, d: u64) -> Ordering {
    let su = u.sign();
    let sv = v.sign();
    match (su, sv) {
        (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
        (Sign::Plus | Sign::NoSign, Sign::Plus | Sign::NoSign) => Ordering::Greater,
        (Sign::Minus | Sign::NoSign, Sign::Minus | Sign::NoSign) => Ordering::Less,
        _ => {
            // Opposite signs: the term of larger magnitude decides.
            let u2 = u * u;
            let v2d = v * v * BigInt::from(d);
            match u2.cmp(&v2d) {
                Ordering::Greater => {
                    if su == Sign::Plus {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    }
                }
                Ordering::Less => {
                    if sv == Sign::Plus {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    }
                }
                // d is not a perfect square, so u^2 = v^2 d forces u = v = 0.
                Ordering::Equal => unreachable!("non-square discriminant"),
            }
        }
    }
}

fn clear_denominators(x: &Rational, y: &Rational) -> (BigInt, BigInt) {
    let l = x.denom().lcm(y.denom());
    (x.numer() * (&l / x.denom()), y.numer() * (&l / y.denom()))
}

impl FieldElem {
    /// Exact comparison; fails only for operands from different fields.
    pub fn try_cmp(&self, other: &FieldElem) -> Result<Ordering> {
        let d = self.compatible(other)?;
        if let (FieldElem::Rational(a), FieldElem::Rational(b)) = (self, other) {
            return Ok(a.cmp(b));
        }
        let (x1, y1, _) = self.parts();
        let (x2, y2, _) = other.parts();
        let (u, v) = clear_denominators(&(x1 - x2), &(y1 - y2));
        Ok(sign_of(&u, &v, d.expect("quadratic operand present")))
    }

    /// The unique integer `f` with `f <= self < f + 1`.
    pub fn floor(&self) -> BigInt {
        match self {
            FieldElem::Rational(r) => r.floor().to_integer(),
            FieldElem::Quadratic(q) => {
                // b*sqrt(d) is irrational, so its floor comes from isqrt of b^2 d
                // and the fractional part never closes the gap to the next integer.
                let b2d = q.b() * q.b() * BigInt::from(q.discriminant());
                let r = isqrt(&b2d);
                let fl_b = if q.b().is_positive() {
                    r
                } else {
                    -r - BigInt::one()
                };
                (q.a() + fl_b).div_floor(q.c())
            }
        }
    }

    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        if FieldElem::from_int(f.clone()) == *self {
            f
        } else {
            f + BigInt::one()
        }
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(&self) -> FieldElem {
        self - &FieldElem::from_int(self.floor())
    }

    pub fn min_of(self, other: FieldElem) -> FieldElem {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max_of(self, other: FieldElem) -> FieldElem {
        if other > self {
            other
        } else {
            self
        }
    }

    /// True when `0 <= self < 1`.
    pub fn in_unit_interval(&self) -> bool {
        self.signum() >= 0 && *self < FieldElem::one()
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order on values from one field. Comparing values from two different
/// quadratic fields panics; use [`FieldElem::try_cmp`] where that can happen.
impl Ord for FieldElem {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.try_cmp(other) {
            Ok(o) => o,
            Err(e) => panic!("cmp: {e}"),
        }
    }
}
