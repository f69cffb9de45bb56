//! Invariant density as a weighted sum over non-full fundamental intervals:
//! `φ = 1 + Σ_{k≥1} s^{-k} Σ_{E ∈ D_k} 1_{[0, e_E)}`, normalized.
//!
//! Only the multiset `H_k` of image heights of `D_k` matters, and the
//! children of a cell depend only on its height.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::refine::child_heights;
use super::PiecewiseConstantFn;
use crate::arith::FieldElem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::maps::PiecewiseAffineMap;

/// Multiset of heights: height to multiplicity.
pub type Heights = BTreeMap<FieldElem, BigInt>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dk10Config {
    pub max_rank: usize,
    /// Largest distinct-height set searched for closure under the child map.
    pub closure_cap: usize,
    /// Truncation residual above which the result is rejected.
    pub tail_threshold: f64,
}

impl Default for Dk10Config {
    fn default() -> Self {
        Dk10Config {
            max_rank: 64,
            closure_cap: 512,
            tail_threshold: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Dk10Mode {
    /// `D_k` is empty from rank `rank` on.
    Finite {
        rank: usize,
    },
    /// `H_rank = ratio * H_{rank-1}`; the tail is a geometric series.
    Geometric {
        rank: usize,
        ratio: FieldElem,
    },
    /// Heights close under the child map; the series is a matrix geometric series.
    LinearSystem {
        heights: usize,
    },
    Truncated {
        rank: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dk10Result {
    pub density: PiecewiseConstantFn,
    pub exact: bool,
    /// Zero in exact modes; otherwise `∫φ_K · s/(s-1)` at the last rank `K`.
    pub tail: FieldElem,
    pub mode: Dk10Mode,
}

struct ChildCache<'a> {
    map: &'a PiecewiseAffineMap,
    cache: HashMap<FieldElem, Vec<FieldElem>>,
}

impl<'a> ChildCache<'a> {
    fn new(map: &'a PiecewiseAffineMap) -> Self {
        ChildCache {
            map,
            cache: HashMap::new(),
        }
    }

    /// Heights of the non-full children of a cell of height `e`.
    fn get(&mut self, e: &FieldElem) -> &[FieldElem] {
        let map = self.map;
        self.cache.entry(e.clone()).or_insert_with(|| {
            child_heights(map, e)
                .into_iter()
                .filter(|h| !h.is_one())
                .collect()
        })
    }

    fn next(&mut self, h: &Heights) -> Heights {
        let mut out = Heights::new();
        for (e, n) in h {
            for c in self.get(e).to_vec() {
                *out.entry(c).or_insert_with(BigInt::zero) += n;
            }
        }
        out
    }
}

/// `H_1`: heights of the non-full branches.
pub fn first_heights(map: &PiecewiseAffineMap) -> Heights {
    let mut h = Heights::new();
    for b in map.non_full_branches() {
        *h.entry(b.image_hi.clone()).or_insert_with(BigInt::zero) += 1;
    }
    h
}

/// `H_1, ..., H_k`.
pub fn heights_up_to(map: &PiecewiseAffineMap, k: usize) -> Vec<Heights> {
    let mut cc = ChildCache::new(map);
    let mut out = vec![first_heights(map)];
    while out.len() < k {
        let next = cc.next(out.last().unwrap());
        out.push(next);
    }
    out
}

/// `Some(ρ)` when `b = ρ a` as multisets with the same support.
fn proportional(a: &Heights, b: &Heights) -> Option<FieldElem> {
    if a.is_empty() || a.len() != b.len() || !a.keys().eq(b.keys()) {
        return None;
    }
    let mut ratio: Option<FieldElem> = None;
    for (e, na) in a {
        let r = FieldElem::ratio(b[e].clone(), na.clone());
        match &ratio {
            None => ratio = Some(r),
            Some(x) if *x == r => {}
            Some(_) => return None,
        }
    }
    ratio
}

fn add_weighted(acc: &mut BTreeMap<FieldElem, FieldElem>, h: &Heights, w: &FieldElem) {
    for (e, n) in h {
        let term = w * &FieldElem::from_int(n.clone());
        let slot = acc.entry(e.clone()).or_insert_with(FieldElem::zero);
        *slot = &*slot + &term;
    }
}

/// `φ = 1 + Σ_e c_e 1_{[0, e)}` as a step function.
fn assemble(coeffs: &BTreeMap<FieldElem, FieldElem>) -> Result<PiecewiseConstantFn> {
    let mut bps = vec![FieldElem::zero()];
    bps.extend(coeffs.keys().cloned());
    bps.push(FieldElem::one());
    let mut vals = Vec::with_capacity(coeffs.len() + 1);
    let mut running = FieldElem::one();
    vals.push(running.clone());
    for c in coeffs.values().rev() {
        running = &running + c;
        vals.push(running.clone());
    }
    vals.reverse();
    PiecewiseConstantFn::new(bps, vals)
}

/// Distinct heights reachable from `start`, if at most `cap` of them.
fn closure(cc: &mut ChildCache, start: &Heights, cap: usize) -> Option<Vec<FieldElem>> {
    let mut seen: BTreeSet<FieldElem> = start.keys().cloned().collect();
    let mut stack: Vec<FieldElem> = seen.iter().cloned().collect();
    while let Some(e) = stack.pop() {
        for c in cc.get(&e).to_vec() {
            if seen.insert(c.clone()) {
                if seen.len() > cap {
                    return None;
                }
                stack.push(c);
            }
        }
    }
    Some(seen.into_iter().collect())
}

/// Solves `X = (1/s) Σ_j (M/s)^j h_1`; `None` if the system is singular or
/// the solution has a negative entry (the series diverges).
fn matrix_series(
    cc: &mut ChildCache,
    support: &[FieldElem],
    h1: &Heights,
    s: &FieldElem,
) -> Option<BTreeMap<FieldElem, FieldElem>> {
    let n = support.len();
    let index: HashMap<&FieldElem, usize> =
        support.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let inv_s = s.recip().ok()?;
    // Row i, column j: -(number of children of height e_i from a cell of height e_j) / s.
    let mut a = vec![vec![FieldElem::zero(); n]; n];
    for (j, e) in support.iter().enumerate() {
        for c in cc.get(e).to_vec() {
            let i = index[&c];
            a[i][j] = &a[i][j] - &inv_s;
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = &row[i] + &FieldElem::one();
    }
    let rhs: Vec<FieldElem> = support
        .iter()
        .map(|e| FieldElem::from_int(h1.get(e).cloned().unwrap_or_default()))
        .collect();
    let y = linalg::solve(&a, &rhs).ok()?;
    if y.iter().any(|v| v.signum() < 0) {
        return None;
    }
    Some(
        support
            .iter()
            .cloned()
            .zip(y.into_iter().map(|v| &v * &inv_s))
            .filter(|(_, v)| !v.is_zero())
            .collect(),
    )
}

pub fn dk10_density(map: &PiecewiseAffineMap, max_rank: usize) -> Result<Dk10Result> {
    dk10_density_with(
        map,
        &Dk10Config {
            max_rank,
            ..Dk10Config::default()
        },
    )
}

pub fn dk10_density_with(map: &PiecewiseAffineMap, cfg: &Dk10Config) -> Result<Dk10Result> {
    if cfg.max_rank == 0 {
        return Err(Error::InvalidArgument("max_rank must be at least 1".into()));
    }
    let s = map.slope().clone();
    let inv_s = s.recip()?;
    let mut cc = ChildCache::new(map);
    let h1 = first_heights(map);
    let mut coeffs: BTreeMap<FieldElem, FieldElem> = BTreeMap::new();
    let mut weight = inv_s.clone();
    let mut prev: Option<Heights> = None;
    let mut h = h1.clone();
    for k in 1..=cfg.max_rank {
        if h.is_empty() {
            return finish(coeffs, Dk10Mode::Finite { rank: k });
        }
        if let Some(rho) = prev.as_ref().and_then(|p| proportional(p, &h)) {
            let q = &rho * &inv_s;
            if q >= FieldElem::one() {
                return Err(Error::TailNotConvergent(f64::INFINITY));
            }
            let w = &weight * &(&FieldElem::one() - &q).recip()?;
            add_weighted(&mut coeffs, &h, &w);
            return finish(
                coeffs,
                Dk10Mode::Geometric {
                    rank: k,
                    ratio: rho,
                },
            );
        }
        add_weighted(&mut coeffs, &h, &weight);
        if k == cfg.max_rank {
            break;
        }
        let next = cc.next(&h);
        prev = Some(std::mem::replace(&mut h, next));
        weight = &weight * &inv_s;
    }
    if let Some(support) = closure(&mut cc, &h1, cfg.closure_cap) {
        if let Some(c) = matrix_series(&mut cc, &support, &h1, &s) {
            return finish(
                c,
                Dk10Mode::LinearSystem {
                    heights: support.len(),
                },
            );
        }
    }
    // Truncated: h holds H_K, weight is s^{-K}.
    let mass = h.iter().fold(FieldElem::zero(), |acc, (e, n)| {
        &acc + &(e * &FieldElem::from_int(n.clone()))
    });
    let tail = &(&(&weight * &mass) * &s) / &(&s - &FieldElem::one());
    let t = tail.to_f64();
    if t > cfg.tail_threshold {
        return Err(Error::TailNotConvergent(t));
    }
    let density = assemble(&coeffs)?.normalized()?.merged();
    Ok(Dk10Result {
        density,
        exact: false,
        tail,
        mode: Dk10Mode::Truncated { rank: cfg.max_rank },
    })
}

fn finish(coeffs: BTreeMap<FieldElem, FieldElem>, mode: Dk10Mode) -> Result<Dk10Result> {
    let density = assemble(&coeffs)?.normalized()?.merged();
    Ok(Dk10Result {
        density,
        exact: true,
        tail: FieldElem::zero(),
        mode,
    })
}
