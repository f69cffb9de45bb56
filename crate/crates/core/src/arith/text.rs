//! Text form: `num/den` for rationals and `(a+b*sqrt(D))/c` for quadratics.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use regex::Regex;

use super::{big_abs, FieldElem};
use crate::error::{Error, Result};

pub(super) fn format(x: &FieldElem) -> String {
    match x {
        FieldElem::Rational(r) => {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        }
        FieldElem::Quadratic(q) => {
            let sign = if q.b().is_negative() { '-' } else { '+' };
            let b = big_abs(q.b());
            let coeff = if b.is_one() {
                String::new()
            } else {
                format!("{b}*")
            };
            let body = format!("({}{}{}sqrt({}))", q.a(), sign, coeff, q.discriminant());
            if q.c().is_one() {
                body
            } else {
                format!("{body}/{}", q.c())
            }
        }
    }
}

fn rational_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([+-]?\d+)(?:/([+-]?\d+))?$").unwrap())
}

fn quadratic_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(\()?([+-]?\d+)?([+-])?(?:(\d+)\*)?sqrt\((\d+)\)(\))?(?:/([+-]?\d+))?$")
            .unwrap()
    })
}

fn bad(s: &str, why: &str) -> Error {
    Error::Parse(s.to_string(), why.to_string())
}

fn int(s: &str, text: &str) -> Result<BigInt> {
    s.parse().map_err(|_| bad(text, "bad integer"))
}

pub(super) fn parse(text: &str) -> Result<FieldElem> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(caps) = rational_re().captures(&s) {
        let num = int(&caps[1], text)?;
        let den = match caps.get(2) {
            Some(m) => int(m.as_str(), text)?,
            None => BigInt::one(),
        };
        if den == BigInt::from(0) {
            return Err(Error::DivisionByZero);
        }
        return Ok(FieldElem::ratio(num, den));
    }
    let caps = quadratic_re()
        .captures(&s)
        .ok_or_else(|| bad(text, "expected num/den or (a+b*sqrt(D))/c"))?;
    if caps.get(1).is_some() != caps.get(6).is_some() {
        return Err(bad(text, "unbalanced parentheses"));
    }
    let a = match caps.get(2) {
        Some(m) => int(m.as_str(), text)?,
        None => BigInt::from(0),
    };
    if caps.get(2).is_some() && caps.get(3).is_none() {
        return Err(bad(text, "missing sign between rational and surd parts"));
    }
    let mut b = match caps.get(4) {
        Some(m) => int(m.as_str(), text)?,
        None => BigInt::one(),
    };
    if caps.get(3).map(|m| m.as_str()) == Some("-") {
        b = -b;
    }
    let d: u64 = caps[5]
        .parse()
        .map_err(|_| bad(text, "discriminant out of range"))?;
    let c = match caps.get(7) {
        Some(m) => int(m.as_str(), text)?,
        None => BigInt::one(),
    };
    if c == BigInt::from(0) {
        return Err(Error::DivisionByZero);
    }
    let (a, b, c) = if c.is_negative() {
        (-a, -b, -c)
    } else {
        (a, b, c)
    };
    FieldElem::quadratic(a, b, c, d)
}
