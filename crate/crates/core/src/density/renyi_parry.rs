use std::collections::BTreeMap;

use super::PiecewiseConstantFn;
use crate::arith::FieldElem;
use crate::error::Result;
use crate::maps::beta_map;
use crate::orbits::{orbit_of_one_with, OrbitConfig, OrbitStatus};

/// Density of the absolutely continuous `T_β`-invariant measure,
/// proportional to `Σ_{n≥0} β^{-n} 1_{[0, T^n(1))}`.
///
/// Exact when the orbit of 1 terminates or cycles; otherwise the sum is cut
/// after `max_rank` terms.
pub fn renyi_parry_density(
    beta: &FieldElem,
    max_rank: usize,
) -> Result<(PiecewiseConstantFn, bool)> {
    let map = beta_map(beta)?;
    let report = orbit_of_one_with(&map, max_rank.max(1), &OrbitConfig::from_env())?;
    let inv = beta.recip()?;
    let mut coeffs: BTreeMap<FieldElem, FieldElem> = BTreeMap::new();
    let mut add = |e: &FieldElem, w: FieldElem| {
        if !e.is_zero() {
            let slot = coeffs.entry(e.clone()).or_insert_with(FieldElem::zero);
            *slot = &*slot + &w;
        }
    };
    add(&FieldElem::one(), FieldElem::one());
    // With a full last branch T^n(1) = 0 for n >= 1.
    let points: &[FieldElem] = if report.full_endpoint {
        &[]
    } else {
        &report.points
    };
    let exact = report.full_endpoint
        || matches!(
            report.status,
            OrbitStatus::Terminated | OrbitStatus::EventuallyPeriodic { .. }
        );
    let mut w = FieldElem::one();
    match report.status {
        OrbitStatus::EventuallyPeriodic { preperiod, period } if !report.full_endpoint => {
            for x in &points[..preperiod] {
                w = &w * &inv;
                add(x, w.clone());
            }
            let boost = (&FieldElem::one() - &inv.pow(period as u32)).recip()?;
            for x in &points[preperiod..preperiod + period] {
                w = &w * &inv;
                add(x, &w * &boost);
            }
        }
        _ if exact => {
            for x in points {
                w = &w * &inv;
                add(x, w.clone());
            }
        }
        _ => {
            let mut x = map.eval_at_one();
            for _ in 0..max_rank {
                w = &w * &inv;
                add(&x, w.clone());
                if x.is_zero() {
                    break;
                }
                x = map.eval(&x)?;
            }
        }
    }
    let mut bps = vec![FieldElem::zero()];
    bps.extend(coeffs.keys().cloned());
    let mut vals = Vec::new();
    let mut running = FieldElem::zero();
    for c in coeffs.values().rev() {
        running = &running + c;
        vals.push(running.clone());
    }
    vals.reverse();
    let f = PiecewiseConstantFn::new(bps, vals)?.normalized()?.merged();
    Ok((f, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::transfer::is_invariant_density;

    fn q(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    #[test]
    fn integer_base_is_lebesgue() {
        let (f, exact) = renyi_parry_density(&q("2"), 10).unwrap();
        assert!(exact);
        assert_eq!(f, PiecewiseConstantFn::constant(q("1")));
    }

    #[test]
    fn golden_ratio() {
        let g = FieldElem::quadratic(1, 1, 2, 5).unwrap();
        let (f, exact) = renyi_parry_density(&g, 10).unwrap();
        assert!(exact);
        assert_eq!(f.breakpoints()[1], g.recip().unwrap());
        assert_eq!(f.values()[0], FieldElem::quadratic(5, 3, 10, 5).unwrap());
        assert_eq!(f.values()[1], FieldElem::quadratic(5, 1, 10, 5).unwrap());
        assert!(is_invariant_density(&beta_map(&g).unwrap(), &f).unwrap());
    }

    #[test]
    fn periodic_orbit_of_one() {
        // β = (3+sqrt(5))/2: T(1) = β - 2 = (sqrt(5)-1)/2, a fixed point.
        let b = FieldElem::quadratic(3, 1, 2, 5).unwrap();
        let (f, exact) = renyi_parry_density(&b, 50).unwrap();
        assert!(exact);
        assert!(is_invariant_density(&beta_map(&b).unwrap(), &f).unwrap());
    }

    #[test]
    fn seven_thirds_truncates() {
        let (f, exact) = renyi_parry_density(&q("7/3"), 20).unwrap();
        assert!(!exact);
        assert_eq!(f.integral(), q("1"));
    }
}
