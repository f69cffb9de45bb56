//! Forward orbits of discontinuity points, with exact classification.
//!
//! Orbits are iterated exactly and stop at the first of: the point 0, a
//! repeated point, a certificate of infiniteness, the bit-length bound, or
//! the iteration cap.
//!
//! Two certificates prove an orbit infinite:
//!
//! * [`InfiniteReason::DenominatorGrowth`]: for `T_{β1} ∘ T_{β2}` with `β1 = p1/q1`,
//!   `β2 = p2/q2`, write `p1/q2 = p/z` in lowest terms. If `z > 1`, the
//!   denominator of the `n`-th iterate of 1 is divisible by `z^n`.
//! * [`InfiniteReason::ValuationGrowth`]: for a rational map with slope `A/B`
//!   in lowest terms and a prime `π | B`, once an iterate `x ≠ 0` satisfies
//!   `v_π(x) - v_π(B) < v_π(c)` for every nonzero branch intercept `c`, each
//!   further step lowers `v_π` by exactly `v_π(B)`. The iterates are then
//!   pairwise distinct and membership of any point is decidable.
//!
//! The bit-length bound ([`InfiniteReason::BitLength`]) is a heuristic
//! diagnosis, not a proof.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{FieldElem, Rational};
use crate::error::{Error, Result};
use crate::maps::PiecewiseAffineMap;

pub const DEFAULT_MAX_BITS: u64 = 4096;
pub const MAX_BITS_ENV: &str = "ALTBASE_MAX_BITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitConfig {
    /// Bit length of an iterate above which the orbit is diagnosed infinite.
    pub max_bits: u64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

impl OrbitConfig {
    /// Default configuration, with `max_bits` overridden by `ALTBASE_MAX_BITS`.
    pub fn from_env() -> Self {
        let max_bits = std::env::var(MAX_BITS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_BITS);
        OrbitConfig { max_bits }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum InfiniteReason {
    DenominatorGrowth {
        #[serde(serialize_with = "ser_big")]
        z: BigInt,
    },
    ValuationGrowth {
        #[serde(serialize_with = "ser_big")]
        prime: BigInt,
        /// Index into `points` of the first iterate satisfying the growth condition.
        from_step: usize,
        /// Drop in `v_prime` per step.
        per_step: u64,
    },
    BitLength {
        bits: u64,
        bound: u64,
    },
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum OrbitStatus {
    /// The last point is 0.
    Terminated,
    /// `points[preperiod + period]` would equal `points[preperiod]`.
    EventuallyPeriodic {
        preperiod: usize,
        period: usize,
    },
    DiagnosedInfinite {
        reason: InfiniteReason,
    },
    Truncated {
        max_iter: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    /// Iterates as visited, starting at `T(seed)`.
    pub points: Vec<FieldElem>,
    pub status: OrbitStatus,
    /// Set when the seed was 1 and the left limit there is 1 itself.
    pub full_endpoint: bool,
}

impl OrbitReport {
    /// True for terminated and eventually periodic orbits.
    pub fn is_finite(&self) -> bool {
        matches!(
            self.status,
            OrbitStatus::Terminated | OrbitStatus::EventuallyPeriodic { .. }
        )
    }

    /// True when the orbit is certified infinite by a proof, not a heuristic.
    pub fn is_certified_infinite(&self) -> bool {
        matches!(
            self.status,
            OrbitStatus::DiagnosedInfinite {
                reason: InfiniteReason::DenominatorGrowth { .. }
                    | InfiniteReason::ValuationGrowth { .. }
            }
        )
    }

    pub fn point_set(&self) -> BTreeSet<FieldElem> {
        self.points.iter().cloned().collect()
    }
}

/// `Finite` means the denominator test does not force an infinite orbit; it is not a
/// proof of finiteness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum DenominatorVerdict {
    Finite,
    Infinite {
        #[serde(serialize_with = "ser_big")]
        z: BigInt,
    },
}

/// Diagnosis for the orbit of 1 under `T_{beta1} ∘ T_{beta2}` (apply `beta2` first).
pub fn denominator_diagnosis(beta1: &Rational, beta2: &Rational) -> DenominatorVerdict {
    let p1 = beta1.numer();
    let q2 = beta2.denom();
    let z = q2 / p1.gcd(q2);
    if z > BigInt::one() {
        DenominatorVerdict::Infinite { z }
    } else {
        DenominatorVerdict::Finite
    }
}

/// Distinct image heights of the non-full branches, in increasing order.
pub fn discontinuity_seeds(map: &PiecewiseAffineMap) -> Vec<FieldElem> {
    let set: BTreeSet<FieldElem> = map
        .non_full_branches()
        .map(|b| b.image_hi.clone())
        .collect();
    set.into_iter().collect()
}

/// `v_p(n)` for `n != 0`.
fn valuation_int(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// `v_p(x)` for nonzero rational `x`.
pub fn valuation(x: &Rational, p: &BigInt) -> i64 {
    valuation_int(x.numer(), p) - valuation_int(x.denom(), p)
}

fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut n = n.abs();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        if n.is_multiple_of(&d) {
            out.push(d.clone());
            while n.is_multiple_of(&d) {
                n /= &d;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

/// Per-prime data for the valuation certificate of a rational map.
#[derive(Clone, Debug)]
struct GrowthPrime {
    prime: BigInt,
    drop: i64,
    /// Minimum valuation over the nonzero intercepts, `None` if all are zero.
    floor: Option<i64>,
}

#[derive(Clone, Debug)]
struct GrowthCheck {
    primes: Vec<GrowthPrime>,
}

impl GrowthCheck {
    fn new(map: &PiecewiseAffineMap) -> Option<Self> {
        let slope = map.slope().as_rational()?;
        let b = slope.denom();
        if b.is_one() {
            return None;
        }
        let intercepts: Vec<Rational> = map
            .branches()
            .iter()
            .filter_map(|br| br.intercept.as_rational().cloned())
            .filter(|c| !c.is_zero())
            .collect();
        let primes = prime_factors(b)
            .into_iter()
            .map(|prime| {
                let drop = valuation_int(b, &prime);
                let floor = intercepts.iter().map(|c| valuation(c, &prime)).min();
                GrowthPrime { prime, drop, floor }
            })
            .collect();
        Some(GrowthCheck { primes })
    }

    /// The first prime for which `x` starts strictly decreasing valuations.
    fn fires(&self, x: &FieldElem) -> Option<&GrowthPrime> {
        let r = x.as_rational()?;
        if r.is_zero() {
            return None;
        }
        self.primes.iter().find(|g| {
            let v = valuation(r, &g.prime) - g.drop;
            g.floor.is_none_or(|f| v < f)
        })
    }
}

/// Bit size of the largest integer in the canonical form of `x`.
pub fn bit_size(x: &FieldElem) -> u64 {
    match x {
        FieldElem::Rational(r) => r.numer().bits().max(r.denom().bits()),
        FieldElem::Quadratic(q) => q.a().bits().max(q.b().bits()).max(q.c().bits()),
    }
}

fn iterate(
    map: &PiecewiseAffineMap,
    first: FieldElem,
    max_iter: usize,
    cfg: &OrbitConfig,
) -> Result<(Vec<FieldElem>, OrbitStatus)> {
    let growth = GrowthCheck::new(map);
    let mut points = vec![first];
    let mut seen: HashMap<FieldElem, usize> = HashMap::new();
    loop {
        let i = points.len() - 1;
        let x = &points[i];
        if x.is_zero() {
            return Ok((points, OrbitStatus::Terminated));
        }
        if let Some(&j) = seen.get(x) {
            points.pop();
            return Ok((
                points,
                OrbitStatus::EventuallyPeriodic {
                    preperiod: j,
                    period: i - j,
                },
            ));
        }
        seen.insert(x.clone(), i);
        if let Some(g) = growth.as_ref().and_then(|g| g.fires(x)) {
            let reason = InfiniteReason::ValuationGrowth {
                prime: g.prime.clone(),
                from_step: i,
                per_step: g.drop as u64,
            };
            return Ok((points, OrbitStatus::DiagnosedInfinite { reason }));
        }
        let bits = bit_size(x);
        if bits > cfg.max_bits {
            let reason = InfiniteReason::BitLength {
                bits,
                bound: cfg.max_bits,
            };
            return Ok((points, OrbitStatus::DiagnosedInfinite { reason }));
        }
        if points.len() >= max_iter {
            return Ok((points, OrbitStatus::Truncated { max_iter }));
        }
        let next = map.eval(x)?;
        points.push(next);
    }
}

fn check_max_iter(max_iter: usize) -> Result<()> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    Ok(())
}

/// Orbit of the left limit at 1: `T(1), T^2(1), ...`.
pub fn orbit_of_one(map: &PiecewiseAffineMap, max_iter: usize) -> Result<OrbitReport> {
    orbit_of_one_with(map, max_iter, &OrbitConfig::from_env())
}

pub fn orbit_of_one_with(
    map: &PiecewiseAffineMap,
    max_iter: usize,
    cfg: &OrbitConfig,
) -> Result<OrbitReport> {
    check_max_iter(max_iter)?;
    let first = map.eval_at_one();
    if first.is_one() {
        return Ok(OrbitReport {
            points: vec![first, FieldElem::zero()],
            status: OrbitStatus::Terminated,
            full_endpoint: true,
        });
    }
    if let [f1, f2] = map.factors() {
        if let (Some(b2), Some(b1)) = (f1.as_rational(), f2.as_rational()) {
            if let DenominatorVerdict::Infinite { z } = denominator_diagnosis(b1, b2) {
                return Ok(OrbitReport {
                    points: vec![first],
                    status: OrbitStatus::DiagnosedInfinite {
                        reason: InfiniteReason::DenominatorGrowth { z },
                    },
                    full_endpoint: false,
                });
            }
        }
    }
    let (points, status) = iterate(map, first, max_iter, cfg)?;
    Ok(OrbitReport {
        points,
        status,
        full_endpoint: false,
    })
}

/// Orbit of `x0`: `T(x0), T^2(x0), ...`.
pub fn orbit_of_point(
    map: &PiecewiseAffineMap,
    x0: &FieldElem,
    max_iter: usize,
) -> Result<OrbitReport> {
    orbit_of_point_with(map, x0, max_iter, &OrbitConfig::from_env())
}

pub fn orbit_of_point_with(
    map: &PiecewiseAffineMap,
    x0: &FieldElem,
    max_iter: usize,
    cfg: &OrbitConfig,
) -> Result<OrbitReport> {
    check_max_iter(max_iter)?;
    let first = map.eval(x0)?;
    let (points, status) = iterate(map, first, max_iter, cfg)?;
    Ok(OrbitReport {
        points,
        status,
        full_endpoint: false,
    })
}

/// Forward orbit of a point including the point itself, with decidable
/// membership whenever the orbit is finite or carries a valuation certificate.
#[derive(Clone, Debug)]
pub struct OrbitOracle {
    map: PiecewiseAffineMap,
    points: Vec<FieldElem>,
    status: OrbitStatus,
    growth: Option<GrowthPrime>,
}

impl OrbitOracle {
    /// Orbit `{x, T(x), T^2(x), ...}`; `x` must lie in `[0, 1)`.
    pub fn new(
        map: &PiecewiseAffineMap,
        x: FieldElem,
        max_iter: usize,
        cfg: &OrbitConfig,
    ) -> Result<Self> {
        if !x.in_unit_interval() {
            return Err(Error::PointOutOfRange(x.to_string()));
        }
        let (points, status) = iterate(map, x, max_iter.max(1), cfg)?;
        let growth = match &status {
            OrbitStatus::DiagnosedInfinite {
                reason: InfiniteReason::ValuationGrowth { prime, .. },
            } => GrowthCheck::new(map)
                .and_then(|g| g.primes.into_iter().find(|gp| &gp.prime == prime)),
            _ => None,
        };
        Ok(OrbitOracle {
            map: map.clone(),
            points,
            status,
            growth,
        })
    }

    pub fn points(&self) -> &[FieldElem] {
        &self.points
    }

    pub fn status(&self) -> &OrbitStatus {
        &self.status
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            self.status,
            OrbitStatus::Terminated | OrbitStatus::EventuallyPeriodic { .. }
        )
    }

    /// Whether `y` lies on the orbit; `None` when undecidable from the data held.
    pub fn contains(&self, y: &FieldElem) -> Option<bool> {
        if self.points.contains(y) {
            return Some(true);
        }
        if self.is_finite() {
            return Some(false);
        }
        let g = self.growth.as_ref()?;
        let y = match y.as_rational() {
            Some(r) if !r.is_zero() => r,
            // Certified orbits never reach 0 or leave the rationals.
            _ => return Some(false),
        };
        let last = self.points.last().expect("nonempty");
        let w_last = valuation(last.as_rational().expect("rational orbit"), &g.prime);
        let gap = w_last - valuation(y, &g.prime);
        if gap <= 0 || gap % g.drop != 0 {
            return Some(false);
        }
        let mut x = last.clone();
        for _ in 0..gap / g.drop {
            x = self.map.eval(&x).ok()?;
        }
        Some(x.as_rational() == Some(y))
    }
}

/// Union of the forward orbits (including the seeds) of every discontinuity seed.
///
/// Fails with [`Error::OrbitNotFinite`] unless every seed orbit is finite.
pub fn finite_orbit_set(
    map: &PiecewiseAffineMap,
    max_iter: usize,
    cfg: &OrbitConfig,
) -> Result<BTreeSet<FieldElem>> {
    let mut out = BTreeSet::new();
    for s in discontinuity_seeds(map) {
        let o = OrbitOracle::new(map, s.clone(), max_iter, cfg)?;
        if !o.is_finite() {
            return Err(Error::OrbitNotFinite(format!(
                "orbit of {s} under {map}: {:?}",
                o.status
            )));
        }
        out.extend(o.points.iter().cloned());
    }
    Ok(out)
}

/// The orbit set of 1 for `β = (p + sqrt(p^2 + 4q)) / (2n)`, so that `nβ`
/// solves `x^2 = p x + q`, as the five-row case table predicts.
///
/// Returns `None` outside the table's range (`n > p`, `q > p`, `q < 1`) or
/// when `nβ` is rational.
pub fn quadratic_orbit_table(p: i64, q: i64, n: i64) -> Option<BTreeSet<FieldElem>> {
    if q < 1 || q > p || n < 2 || n > p {
        return None;
    }
    let nb = FieldElem::positive_root(p, q).ok()?;
    if nb.is_rational() {
        return None;
    }
    let fe = FieldElem::from_int;
    let nn = fe(n);
    let frac = |a: i64| FieldElem::ratio(a, n);
    let inv_nb = nb.recip().ok()?;
    let t = p % n;
    let mut set = BTreeSet::new();
    set.insert(FieldElem::zero());
    if q == n && n == p {
        set.insert(inv_nb);
    } else if q < n && n == p {
        set.insert(&fe(q) / &(&nn * &nb));
        set.insert(frac(q));
    } else if q == n && n < p {
        set.insert(&frac(t) + &inv_nb);
    } else if q < n && n < p {
        set.insert(frac(q));
        set.insert(&frac(t) + &(&fe(q) / &(&nn * &nb)));
    } else {
        set.insert(frac(q % n));
        set.insert(&frac(t) + &(&fe(q) / &(&nn * &nb)));
    }
    Some(set)
}

/// Collects the set `{0} ∪ points` of an orbit-of-one report.
pub fn orbit_set_with_zero(report: &OrbitReport) -> BTreeSet<FieldElem> {
    let mut s = report.point_set();
    s.insert(FieldElem::zero());
    s
}
