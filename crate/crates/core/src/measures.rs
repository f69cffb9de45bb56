//! Invariant measures of alternate-base systems and decisions on when two
//! systems share one.
//!
//! The measure of `(β_0, ..., β_{p-1})` puts weight `1/p` on each level; the
//! level-`i` component is the invariant density of the period composition
//! that starts by applying `β_i`. Two systems share a measure iff every
//! level's densities agree.
//!
//! Exact comparison of one level works in three stages: identical maps are
//! equal; maps whose seed orbits are all finite are compared through their
//! exact densities; otherwise a point in one map's discontinuity set but not
//! in the other's proves the densities differ. The last step relies on every
//! discontinuity of these densities being a strict downward jump, so that the
//! discontinuity set is exactly the union of the seed orbits minus `{0}`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{FieldElem, Rational};
use crate::density::{solve_density_exact_with, PiecewiseConstantFn};
use crate::error::{Error, Result};
use crate::maps::{compose, AltBaseSystem, PiecewiseAffineMap};
use crate::orbits::{
    denominator_diagnosis, discontinuity_seeds, DenominatorVerdict, OrbitConfig, OrbitOracle,
};

/// Iteration cap per seed orbit.
pub const ORBIT_MAX_ITER: usize = 2_000;
/// Extra iterates of a certified-infinite orbit tried as mismatch witnesses.
const EXTRA_CANDIDATES: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureComponent {
    pub level: usize,
    pub density: PiecewiseConstantFn,
    pub weight: FieldElem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureSpec {
    pub components: Vec<MeasureComponent>,
}

/// Exact invariant measure of the skew product; every level must have finite seed orbits.
pub fn build_measure(system: &AltBaseSystem) -> Result<MeasureSpec> {
    let p = system.period();
    let cfg = OrbitConfig::from_env();
    let components = (0..p)
        .map(|level| {
            let map = system.level_map(level)?;
            let density =
                solve_density_exact_with(&map, ORBIT_MAX_ITER, &cfg).map_err(|e| match e {
                    Error::OrbitNotFinite(why) => {
                        Error::OrbitNotFinite(format!("level {level} ({map}): {why}"))
                    }
                    other => other,
                })?;
            Ok(MeasureComponent {
                level,
                density,
                weight: FieldElem::ratio(1, p as i64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureSpec { components })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictReason {
    ClosedForm,
    ExactDensityComparison,
    DiscontinuityMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    /// The two densities take different values on a common cell.
    DensityValues,
    /// One density jumps at `point`, the other is continuous there.
    Discontinuity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub level: usize,
    pub kind: WitnessKind,
    pub point: FieldElem,
    /// Density values at `point`, when both densities are known exactly.
    pub values: Option<(FieldElem, FieldElem)>,
    /// For a discontinuity witness: whether the jump belongs to the first system.
    pub in_first: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoincidenceVerdict {
    pub equal: bool,
    pub reason: VerdictReason,
    /// One entry per differing level.
    pub witnesses: Vec<Witness>,
}

impl CoincidenceVerdict {
    pub fn witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }
}

fn sys(beta: &FieldElem, n: u64) -> Result<AltBaseSystem> {
    AltBaseSystem::new(vec![beta.clone(), FieldElem::from_int(n)])
}

/// Decision by the closed-form characterization, without computing densities.
///
/// Equal iff the pairs are identical, both bases are integers, or
/// `β = β' = p/q` is a non-integer rational in lowest terms with `q | n` and `q | m`.
pub fn decide_coincidence_closed_form(
    beta: &FieldElem,
    n: u64,
    beta2: &FieldElem,
    m: u64,
) -> Result<CoincidenceVerdict> {
    sys(beta, n)?;
    sys(beta2, m)?;
    if n < 2 || m < 2 {
        return Err(Error::InvalidArgument(
            "second bases must be at least 2".into(),
        ));
    }
    let equal = if beta == beta2 && n == m {
        true
    } else {
        match (beta.as_rational(), beta2.as_rational()) {
            (Some(a), Some(b)) if a.is_integer() && b.is_integer() => true,
            (Some(a), Some(b)) if a.is_integer() || b.is_integer() => false,
            (Some(a), Some(b)) => {
                let divides = |k: u64| BigInt::from(k).is_multiple_of(a.denom());
                a == b && divides(n) && divides(m)
            }
            _ => false,
        }
    };
    Ok(CoincidenceVerdict {
        equal,
        reason: VerdictReason::ClosedForm,
        witnesses: Vec::new(),
    })
}

/// Per-map data shared across comparisons.
#[derive(Debug)]
struct MapData {
    map: PiecewiseAffineMap,
    oracles: Vec<OrbitOracle>,
    density: Option<PiecewiseConstantFn>,
    /// Known points of the discontinuity set, in discovery order.
    candidates: Vec<FieldElem>,
}

impl MapData {
    fn new(map: PiecewiseAffineMap, cfg: &OrbitConfig) -> Result<Self> {
        let oracles = discontinuity_seeds(&map)
            .into_iter()
            .map(|s| OrbitOracle::new(&map, s, ORBIT_MAX_ITER, cfg))
            .collect::<Result<Vec<_>>>()?;
        let finite = oracles.iter().all(OrbitOracle::is_finite);
        let density = if finite {
            Some(solve_density_exact_with(&map, ORBIT_MAX_ITER, cfg)?)
        } else {
            None
        };
        let mut candidates = Vec::new();
        let mut seen = BTreeSet::new();
        for o in &oracles {
            let mut pts: Vec<FieldElem> = o.points().to_vec();
            if !o.is_finite() {
                let mut x = pts.last().cloned().expect("nonempty orbit");
                for _ in 0..EXTRA_CANDIDATES {
                    x = map.eval(&x)?;
                    pts.push(x.clone());
                }
            }
            for p in pts {
                if !p.is_zero() && seen.insert(p.clone()) {
                    candidates.push(p);
                }
            }
        }
        Ok(MapData {
            map,
            oracles,
            density,
            candidates,
        })
    }

    /// Whether `y` is a discontinuity of the density; `None` if undecidable.
    fn jumps_at(&self, y: &FieldElem) -> Option<bool> {
        if y.is_zero() {
            return Some(false);
        }
        let mut unknown = false;
        for o in &self.oracles {
            match o.contains(y) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => unknown = true,
            }
        }
        if unknown {
            None
        } else {
            Some(false)
        }
    }
}

enum LevelOutcome {
    Equal,
    Differ(Box<Witness>),
    Undecided(String),
}

/// Caches per-map orbit and density data across many comparisons.
#[derive(Default)]
pub struct CoincidenceEngine {
    cfg: OrbitConfig,
    cache: Mutex<HashMap<Vec<FieldElem>, Arc<MapData>>>,
}

impl CoincidenceEngine {
    pub fn new(cfg: OrbitConfig) -> Self {
        CoincidenceEngine {
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn data(&self, factors: Vec<FieldElem>) -> Result<Arc<MapData>> {
        if let Some(d) = self.cache.lock().expect("cache lock").get(&factors) {
            return Ok(d.clone());
        }
        let d = Arc::new(MapData::new(compose(&factors)?, &self.cfg)?);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(factors, d.clone());
        Ok(d)
    }

    fn compare_level(&self, level: usize, a: &MapData, b: &MapData) -> LevelOutcome {
        if a.map.same_function_as(&b.map) {
            return LevelOutcome::Equal;
        }
        if let (Some(fa), Some(fb)) = (&a.density, &b.density) {
            return match fa.first_difference(fb) {
                None => LevelOutcome::Equal,
                Some((lo, hi, va, vb)) => LevelOutcome::Differ(Box::new(Witness {
                    level,
                    kind: WitnessKind::DensityValues,
                    point: &(&lo + &hi) / &FieldElem::from_int(2),
                    values: Some((va, vb)),
                    in_first: None,
                })),
            };
        }
        for (first, this, other) in [(true, a, b), (false, b, a)] {
            for y in &this.candidates {
                if other.jumps_at(y) == Some(false) {
                    return LevelOutcome::Differ(Box::new(Witness {
                        level,
                        kind: WitnessKind::Discontinuity,
                        point: y.clone(),
                        values: None,
                        in_first: Some(first),
                    }));
                }
            }
        }
        LevelOutcome::Undecided(format!(
            "level {level}: cannot separate {} and {}",
            a.map, b.map
        ))
    }

    /// Exact comparison of two systems of equal period, level by level.
    pub fn compare_systems(
        &self,
        s1: &AltBaseSystem,
        s2: &AltBaseSystem,
    ) -> Result<CoincidenceVerdict> {
        if s1.period() != s2.period() {
            return Err(Error::InvalidArgument(
                "systems must have the same period".into(),
            ));
        }
        let mut witnesses = Vec::new();
        let mut undecided = Vec::new();
        for level in 0..s1.period() {
            let a = self.data(s1.rotation(level))?;
            let b = self.data(s2.rotation(level))?;
            match self.compare_level(level, &a, &b) {
                LevelOutcome::Equal => {}
                LevelOutcome::Differ(w) => witnesses.push(*w),
                LevelOutcome::Undecided(why) => undecided.push(why),
            }
        }
        if witnesses.is_empty() && !undecided.is_empty() {
            return Err(Error::OrbitNotFinite(undecided.join("; ")));
        }
        let reason = if witnesses
            .iter()
            .any(|w| w.kind == WitnessKind::Discontinuity)
        {
            VerdictReason::DiscontinuityMismatch
        } else {
            VerdictReason::ExactDensityComparison
        };
        Ok(CoincidenceVerdict {
            equal: witnesses.is_empty(),
            reason,
            witnesses,
        })
    }

    pub fn decide_exact(
        &self,
        beta: &FieldElem,
        n: u64,
        beta2: &FieldElem,
        m: u64,
    ) -> Result<CoincidenceVerdict> {
        self.compare_systems(&sys(beta, n)?, &sys(beta2, m)?)
    }

    /// Whether every seed orbit of both level maps of `system` is finite.
    pub fn all_orbits_finite(&self, system: &AltBaseSystem) -> Result<bool> {
        for level in 0..system.period() {
            if self.data(system.rotation(level))?.density.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact comparison of `(β, n)` and `(β', m)`.
pub fn decide_coincidence_exact(
    beta: &FieldElem,
    n: u64,
    beta2: &FieldElem,
    m: u64,
) -> Result<CoincidenceVerdict> {
    CoincidenceEngine::new(OrbitConfig::from_env()).decide_exact(beta, n, beta2, m)
}

/// Exact comparison of `(β1, β2)` and `(β3, β4)` for rational bases, after
/// checking that all discontinuity orbits of both systems are finite.
pub fn compare_general_pair(
    beta1: &Rational,
    beta2: &Rational,
    beta3: &Rational,
    beta4: &Rational,
) -> Result<CoincidenceVerdict> {
    let engine = CoincidenceEngine::new(OrbitConfig::from_env());
    let mut systems = Vec::new();
    for (x, y) in [(beta1, beta2), (beta3, beta4)] {
        for (u, v) in [(x, y), (y, x)] {
            if let DenominatorVerdict::Infinite { z } = denominator_diagnosis(u, v) {
                return Err(Error::OrbitNotFinite(format!(
                    "orbit of 1 under T_{u} after T_{v} is infinite (z = {z})"
                )));
            }
        }
        let s = AltBaseSystem::new(vec![FieldElem::from(x.clone()), FieldElem::from(y.clone())])?;
        if !engine.all_orbits_finite(&s)? {
            return Err(Error::OrbitNotFinite(format!(
                "a discontinuity orbit of ({x}, {y}) is infinite"
            )));
        }
        systems.push(s);
    }
    engine.compare_systems(&systems[0], &systems[1])
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CoincidentPair {
    pub first: (FieldElem, FieldElem),
    pub second: (FieldElem, FieldElem),
}

impl CoincidentPair {
    /// Same non-integer first base `p/q` and integer second bases divisible by `q`.
    pub fn matches_prediction(&self) -> bool {
        let (b1, n) = &self.first;
        let (b2, m) = &self.second;
        let Some(r) = b1.as_rational() else {
            return false;
        };
        b1 == b2
            && !r.is_integer()
            && [n, m].iter().all(|x| {
                x.as_rational()
                    .is_some_and(|v| v.is_integer() && v.numer().is_multiple_of(r.denom()))
            })
    }
}

/// Non-integer rationals `a/b` with `a <= num_max`, `2 <= b <= den_max`.
pub fn rational_grid(num_max: u64, den_max: u64) -> Vec<FieldElem> {
    let mut out = Vec::new();
    for b in 2..=den_max {
        for a in (b + 1)..=num_max {
            if a.gcd(&b) == 1 {
                out.push(FieldElem::ratio(a, b));
            }
        }
    }
    out.sort();
    out
}

/// All coincidences among systems `(β1, β2)` with `β1` a non-integer rational
/// from the grid and `β2` a grid rational or an integer in `2..=n_max`,
/// restricted to systems whose discontinuity orbits are all finite.
pub fn coincidence_search(p_max: u64, den_max: u64, n_max: u64) -> Result<Vec<CoincidentPair>> {
    let engine = CoincidenceEngine::new(OrbitConfig::from_env());
    let firsts = rational_grid(p_max, den_max);
    let mut seconds: Vec<FieldElem> = (2..=n_max).map(FieldElem::from_int).collect();
    seconds.extend(firsts.iter().cloned());
    let candidates: Vec<(FieldElem, FieldElem)> = firsts
        .iter()
        .flat_map(|a| seconds.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    let admissible: Vec<(FieldElem, FieldElem)> = candidates
        .into_par_iter()
        .map(|(a, b)| {
            if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
                let quick = [(x, y), (y, x)].iter().any(|(u, v)| {
                    matches!(
                        denominator_diagnosis(u, v),
                        DenominatorVerdict::Infinite { .. }
                    )
                });
                if quick {
                    return Ok(None);
                }
            }
            let s = AltBaseSystem::new(vec![a.clone(), b.clone()])?;
            Ok(engine.all_orbits_finite(&s)?.then_some((a, b)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let pairs: Vec<(usize, usize)> = (0..admissible.len())
        .flat_map(|i| ((i + 1)..admissible.len()).map(move |j| (i, j)))
        .collect();
    let mut found: Vec<CoincidentPair> = pairs
        .into_par_iter()
        .map(|(i, j)| {
            let (a, b) = &admissible[i];
            let (c, d) = &admissible[j];
            let s1 = AltBaseSystem::new(vec![a.clone(), b.clone()])?;
            let s2 = AltBaseSystem::new(vec![c.clone(), d.clone()])?;
            let v = engine.compare_systems(&s1, &s2)?;
            let (first, second) = if (a, b) <= (c, d) {
                ((a.clone(), b.clone()), (c.clone(), d.clone()))
            } else {
                ((c.clone(), d.clone()), (a.clone(), b.clone()))
            };
            Ok(v.equal.then_some(CoincidentPair { first, second }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    found.sort();
    Ok(found)
}
