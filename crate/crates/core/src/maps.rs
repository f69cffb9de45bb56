//! Piecewise-affine mod-1 maps of constant slope.
//!
//! **Factor order.** [`compose`] takes its factors in *application order*:
//! `compose(&[f1, f2])` is `T_{f2} ∘ T_{f1}`, i.e. `x ↦ T_{f2}(T_{f1}(x))`.
//! In the usual composition notation `T_{β∘n} = T_β ∘ T_n`, so that map is
//! `compose(&[n, β])`. For β = 7/3 and n = 3 this is the slope-7 map with
//! nine branches, three of them non-full with image `[0, 1/3)`; the reverse
//! order `compose(&[7/3, 3])` is the plain `x ↦ 7x mod 1`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::FieldElem;
use crate::error::{Error, Result};

/// One affine piece `x ↦ slope * (x - lo)` on `[lo, hi)`, with image `[0, image_hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineBranch {
    pub lo: FieldElem,
    pub hi: FieldElem,
    pub slope: FieldElem,
    /// `-slope * lo`, so that the branch reads `slope * x + intercept`.
    pub intercept: FieldElem,
    pub image_hi: FieldElem,
}

impl AffineBranch {
    fn new(lo: FieldElem, hi: FieldElem, slope: FieldElem, image_hi: FieldElem) -> Self {
        let intercept = -(&slope * &lo);
        AffineBranch {
            lo,
            hi,
            slope,
            intercept,
            image_hi,
        }
    }

    pub fn is_full(&self) -> bool {
        self.image_hi.is_one()
    }

    pub fn width(&self) -> FieldElem {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &FieldElem) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn apply(&self, x: &FieldElem) -> FieldElem {
        &self.slope * &(x - &self.lo)
    }

    /// The point of `[lo, hi)` sent to `y`, for `0 <= y < image_hi`.
    pub fn preimage(&self, y: &FieldElem) -> FieldElem {
        &self.lo + &(y / &self.slope)
    }
}

/// A mod-1 map on `[0, 1)` given by its rank-1 partition into affine branches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiecewiseAffineMap {
    branches: Vec<AffineBranch>,
    slope: FieldElem,
    factors: Vec<FieldElem>,
}

fn check_factor(f: &FieldElem) -> Result<()> {
    if *f <= FieldElem::one() {
        return Err(Error::BetaNotGreaterThanOne(f.to_string()));
    }
    Ok(())
}

/// `T_beta(x) = beta * x mod 1`.
pub fn beta_map(beta: &FieldElem) -> Result<PiecewiseAffineMap> {
    compose(std::slice::from_ref(beta))
}

/// Builds `T_{f_last} ∘ ... ∘ T_{f_first}` as one flat branch list.
///
/// Each factor refines the current partition by pulling back the next map's
/// breakpoints `j / g` through every branch.
pub fn compose(factors: &[FieldElem]) -> Result<PiecewiseAffineMap> {
    if factors.is_empty() {
        return Err(Error::EmptyFactorList);
    }
    let mut field = None;
    for f in factors {
        field = match (field, f.discriminant()) {
            (Some(a), Some(b)) if a != b => return Err(Error::MixedDiscriminants(a, b)),
            (None, d) => d,
            (a, _) => a,
        };
        check_factor(f)?;
    }
    let mut branches = vec![AffineBranch::new(
        FieldElem::zero(),
        FieldElem::one(),
        FieldElem::one(),
        FieldElem::one(),
    )];
    for g in factors {
        branches = refine_by_factor(&branches, g);
    }
    let slope = branches[0].slope.clone();
    Ok(PiecewiseAffineMap {
        branches,
        slope,
        factors: factors.to_vec(),
    })
}

fn refine_by_factor(branches: &[AffineBranch], g: &FieldElem) -> Vec<AffineBranch> {
    let mut out = Vec::new();
    for b in branches {
        let new_slope = &b.slope * g;
        // T_g has pieces [j/g, (j+1)/g) meeting [0, image_hi) for j < ceil(g * image_hi).
        let pieces = (g * &b.image_hi).ceil();
        let mut j = num_bigint::BigInt::from(0);
        while j < pieces {
            let y_lo = &FieldElem::from_int(j.clone()) / g;
            let next = &FieldElem::from_int(&j + 1) / g;
            let last = next >= b.image_hi;
            let x_lo = if j == num_bigint::BigInt::from(0) {
                b.lo.clone()
            } else {
                b.preimage(&y_lo)
            };
            let (x_hi, image_hi) = if last {
                let img = g * &b.image_hi - FieldElem::from_int(j.clone());
                (b.hi.clone(), img)
            } else {
                (b.preimage(&next), FieldElem::one())
            };
            out.push(AffineBranch::new(x_lo, x_hi, new_slope.clone(), image_hi));
            j += 1;
        }
    }
    out
}

impl PiecewiseAffineMap {
    pub fn branches(&self) -> &[AffineBranch] {
        &self.branches
    }

    /// Product of the factors.
    pub fn slope(&self) -> &FieldElem {
        &self.slope
    }

    /// Factors in application order.
    pub fn factors(&self) -> &[FieldElem] {
        &self.factors
    }

    /// Discriminant of the quadratic field the map lives in, if any.
    pub fn field(&self) -> Option<u64> {
        self.factors.iter().find_map(|f| f.discriminant())
    }

    pub fn is_rational(&self) -> bool {
        self.field().is_none()
    }

    /// Index of the branch whose interval contains `x`; `x` must lie in `[0, 1)`.
    pub fn branch_index(&self, x: &FieldElem) -> usize {
        self.branches.partition_point(|b| &b.lo <= x) - 1
    }

    pub fn eval(&self, x: &FieldElem) -> Result<FieldElem> {
        if let Some(d) = self.field() {
            if let Some(e) = x.discriminant() {
                if d != e {
                    return Err(Error::MixedDiscriminants(d, e));
                }
            }
        }
        if !x.in_unit_interval() {
            return Err(Error::PointOutOfRange(x.to_string()));
        }
        Ok(self.branches[self.branch_index(x)].apply(x))
    }

    /// Left limit of the map at 1, the image height of the last branch.
    pub fn eval_at_one(&self) -> FieldElem {
        self.branches.last().expect("nonempty").image_hi.clone()
    }

    /// True when the last branch is full, so the left limit at 1 equals 1.
    pub fn full_endpoint(&self) -> bool {
        self.eval_at_one().is_one()
    }

    pub fn non_full_branches(&self) -> impl Iterator<Item = &AffineBranch> {
        self.branches.iter().filter(|b| !b.is_full())
    }

    /// Branch left endpoints, starting with 0.
    pub fn breakpoints(&self) -> Vec<FieldElem> {
        self.branches.iter().map(|b| b.lo.clone()).collect()
    }

    /// Descriptor string `comp:f1,f2,...`.
    pub fn descriptor(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| f.to_string()).collect();
        format!("comp:{}", parts.join(","))
    }

    /// Whether both maps are the same function on `[0, 1)`.
    ///
    /// Adjacent branches always differ in their affine law (the right one
    /// restarts at 0), so the branch table is canonical and can be compared
    /// directly regardless of the factors that produced it.
    pub fn same_function_as(&self, other: &PiecewiseAffineMap) -> bool {
        self.slope == other.slope
            && self.branches.len() == other.branches.len()
            && self
                .branches
                .iter()
                .zip(&other.branches)
                .all(|(a, b)| a.lo == b.lo && a.image_hi == b.image_hi)
    }
}

impl fmt::Display for PiecewiseAffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Parses `comp:<f1>,<f2>[,...]` (factors in application order).
pub fn parse_descriptor(s: &str) -> Result<PiecewiseAffineMap> {
    let s = s.trim();
    let body = s
        .strip_prefix("comp:")
        .ok_or_else(|| Error::MapDescriptor(s.to_string(), "expected prefix comp:".into()))?;
    let factors = body
        .split(',')
        .map(|t| t.parse::<FieldElem>())
        .collect::<Result<Vec<_>>>()?;
    compose(&factors)
}

impl FromStr for PiecewiseAffineMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_descriptor(s)
    }
}

/// A periodic base sequence `(β_0, ..., β_{p-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AltBaseSystem {
    bases: Vec<FieldElem>,
}

impl AltBaseSystem {
    pub fn new(bases: Vec<FieldElem>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::EmptyFactorList);
        }
        for b in &bases {
            check_factor(b)?;
        }
        for w in bases.windows(2) {
            w[0].compatible(&w[1])?;
        }
        let field = bases.iter().find_map(|b| b.discriminant());
        if let Some(d) = field {
            for b in &bases {
                if let Some(e) = b.discriminant() {
                    if e != d {
                        return Err(Error::MixedDiscriminants(d, e));
                    }
                }
            }
        }
        Ok(AltBaseSystem { bases })
    }

    pub fn bases(&self) -> &[FieldElem] {
        &self.bases
    }

    pub fn period(&self) -> usize {
        self.bases.len()
    }

    pub fn base(&self, level: usize) -> &FieldElem {
        &self.bases[level % self.bases.len()]
    }

    /// Bases in application order starting at `level`: `(β_i, β_{i+1}, ..., β_{i-1})`.
    pub fn rotation(&self, level: usize) -> Vec<FieldElem> {
        let p = self.period();
        (0..p)
            .map(|k| self.bases[(level + k) % p].clone())
            .collect()
    }

    /// The composition acting on level `level` after one full period.
    pub fn level_map(&self, level: usize) -> Result<PiecewiseAffineMap> {
        compose(&self.rotation(level))
    }
}

/// A point `(level, x)` of the skew product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SkewState {
    pub level: usize,
    pub point: FieldElem,
}

/// `K(i, x) = (i + 1 mod p, T_{β_i}(x))`.
pub fn skew_step(system: &AltBaseSystem, state: &SkewState) -> Result<SkewState> {
    if state.level >= system.period() {
        return Err(Error::InvalidArgument(format!(
            "level {} out of range for period {}",
            state.level,
            system.period()
        )));
    }
    if !state.point.in_unit_interval() {
        return Err(Error::PointOutOfRange(state.point.to_string()));
    }
    let beta = system.base(state.level);
    let y = beta.checked_mul(&state.point)?;
    Ok(SkewState {
        level: (state.level + 1) % system.period(),
        point: y.fract(),
    })
}
