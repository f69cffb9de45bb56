use std::collections::BTreeSet;

use super::PiecewiseConstantFn;
use crate::arith::FieldElem;
use crate::error::Result;
use crate::maps::PiecewiseAffineMap;

/// `(Lf)(y) = s^{-1} Σ_{b : y < image_hi(b)} f(b^{-1}(y))`, exactly.
pub fn transfer_apply(
    map: &PiecewiseAffineMap,
    f: &PiecewiseConstantFn,
) -> Result<PiecewiseConstantFn> {
    let mut cuts: BTreeSet<FieldElem> = BTreeSet::new();
    cuts.insert(FieldElem::zero());
    cuts.insert(FieldElem::one());
    for b in map.branches() {
        cuts.insert(b.image_hi.clone());
        for x in f.breakpoints() {
            if b.contains(x) {
                cuts.insert(b.apply(x));
            }
        }
    }
    let cuts: Vec<FieldElem> = cuts.into_iter().collect();
    let inv_s = map.slope().recip()?;
    let two = FieldElem::from_int(2);
    let values = cuts
        .windows(2)
        .map(|w| {
            let mid = &(&w[0] + &w[1]) / &two;
            let sum = map
                .branches()
                .iter()
                .filter(|b| mid < b.image_hi)
                .fold(FieldElem::zero(), |acc, b| &acc + f.eval(&b.preimage(&mid)));
            &sum * &inv_s
        })
        .collect();
    Ok(PiecewiseConstantFn::new(cuts, values)?.merged())
}

/// True when `Lf = f` on every cell.
pub fn is_fixed_point(map: &PiecewiseAffineMap, f: &PiecewiseConstantFn) -> Result<bool> {
    Ok(transfer_apply(map, f)?.same_function(f))
}

/// Fixed point and unit integral, both exact.
pub fn is_invariant_density(map: &PiecewiseAffineMap, f: &PiecewiseConstantFn) -> Result<bool> {
    Ok(f.integral().is_one() && is_fixed_point(map, f)?)
}
