//! Greedy alternate-base digit expansions.

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::FieldElem;
use crate::error::{Error, Result};
use crate::maps::{skew_step, AltBaseSystem, SkewState};

/// A finite greedy prefix; digit `n` was produced at level `(start_level + n) mod p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitString {
    #[serde(serialize_with = "ser_digits")]
    pub digits: Vec<BigInt>,
    pub bases: AltBaseSystem,
    pub start_level: usize,
}

fn ser_digits<S: serde::Serializer>(d: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(d.iter().map(|a| a.to_string()))
}

impl DigitString {
    /// Base used for digit `n`.
    pub fn base_for(&self, n: usize) -> &FieldElem {
        self.bases.base(self.start_level + n)
    }

    /// True when every digit lies in `{0, ..., ceil(base) - 1}`.
    pub fn digits_in_range(&self) -> bool {
        self.digits.iter().enumerate().all(|(n, a)| {
            let top = self.base_for(n).ceil();
            a >= &BigInt::from(0) && a < &top
        })
    }
}

/// Greedy digits of `x` starting at level 0.
pub fn greedy_digits(system: &AltBaseSystem, x: &FieldElem, count: usize) -> Result<DigitString> {
    greedy_digits_from(system, x, count, 0)
}

/// Greedy digits of `x` starting at an arbitrary level.
pub fn greedy_digits_from(
    system: &AltBaseSystem,
    x: &FieldElem,
    count: usize,
    start_level: usize,
) -> Result<DigitString> {
    if !x.in_unit_interval() {
        return Err(Error::PointOutOfRange(x.to_string()));
    }
    let p = system.period();
    let mut state = SkewState {
        level: start_level % p,
        point: x.clone(),
    };
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        let y = system.base(state.level).checked_mul(&state.point)?;
        digits.push(y.floor());
        state = skew_step(system, &state)?;
    }
    Ok(DigitString {
        digits,
        bases: system.clone(),
        start_level: start_level % p,
    })
}

/// Partial sum `Σ a_n / (β_0 ⋯ β_n)` and the tail bound `1 / (β_0 ⋯ β_{N-1})`.
///
/// The true value lies in `[value, value + bound)`.
pub fn reconstruct(ds: &DigitString) -> (FieldElem, FieldElem) {
    let mut value = FieldElem::zero();
    let mut prod = FieldElem::one();
    for (n, a) in ds.digits.iter().enumerate() {
        prod = &prod * ds.base_for(n);
        value = &value + &(&FieldElem::from_int(a.clone()) / &prod);
    }
    (value, prod.recip().expect("product of bases is nonzero"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    fn sys(v: &[&str]) -> AltBaseSystem {
        AltBaseSystem::new(v.iter().map(|s| q(s)).collect()).unwrap()
    }

    #[test]
    fn five_sixths_in_three_halves_two() {
        let ds = greedy_digits(&sys(&["3/2", "2"]), &q("5/6"), 4).unwrap();
        let d: Vec<i64> = ds.digits.iter().map(|a| a.try_into().unwrap()).collect();
        assert_eq!(d, vec![1, 0, 0, 1]);
    }

    #[test]
    fn zero_has_zero_digits() {
        let ds = greedy_digits(&sys(&["7/3", "3"]), &FieldElem::zero(), 6).unwrap();
        assert!(ds.digits.iter().all(|a| *a == BigInt::from(0)));
        let (v, bound) = reconstruct(&ds);
        assert!(v.is_zero());
        assert_eq!(bound, q("1/343"));
    }

    #[test]
    fn single_digit_seven_thirds() {
        let ds = greedy_digits(&sys(&["7/3"]), &q("1/2"), 1).unwrap();
        assert_eq!(ds.digits, vec![BigInt::from(1)]);
        assert_eq!(reconstruct(&ds).0, q("3/7"));
    }

    #[test]
    fn twenty_digits_bracket_the_point() {
        let x = q("5/6");
        let ds = greedy_digits(&sys(&["3/2", "2"]), &x, 20).unwrap();
        let (v, bound) = reconstruct(&ds);
        assert!(v <= x && x < &v + &bound);
        assert_eq!(bound, q("1/59049"));
    }

    #[test]
    fn quadratic_base() {
        let g = FieldElem::quadratic(1, 1, 2, 5).unwrap();
        let s = AltBaseSystem::new(vec![g, q("2")]).unwrap();
        let x = q("2/3");
        let ds = greedy_digits(&s, &x, 15).unwrap();
        assert!(ds.digits_in_range());
        let (v, bound) = reconstruct(&ds);
        assert!(v <= x && x < &v + &bound);
    }

    #[test]
    fn out_of_range() {
        assert!(greedy_digits(&sys(&["2"]), &q("1"), 3).is_err());
    }
}
