use super::PiecewiseConstantFn;
use crate::arith::FieldElem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::maps::PiecewiseAffineMap;
use crate::orbits::{finite_orbit_set, OrbitConfig};

/// Iteration cap for each seed orbit.
pub const SOLVE_MAX_ITER: usize = 10_000;

/// Invariant density from the transfer-operator fixed point on the cells
/// cut by `{0, 1}` and the seed orbits.
pub fn solve_density_exact(map: &PiecewiseAffineMap) -> Result<PiecewiseConstantFn> {
    solve_density_exact_with(map, SOLVE_MAX_ITER, &OrbitConfig::from_env())
}

pub fn solve_density_exact_with(
    map: &PiecewiseAffineMap,
    max_iter: usize,
    cfg: &OrbitConfig,
) -> Result<PiecewiseConstantFn> {
    let mut cuts = finite_orbit_set(map, max_iter, cfg)?;
    cuts.insert(FieldElem::zero());
    cuts.insert(FieldElem::one());
    let cuts: Vec<FieldElem> = cuts.into_iter().collect();
    let n = cuts.len() - 1;
    let skeleton = PiecewiseConstantFn::new(cuts.clone(), vec![FieldElem::zero(); n])?;
    let inv_s = map.slope().recip()?;
    let two = FieldElem::from_int(2);
    // The cut set is forward invariant, so each branch preimage of a cell
    // lies inside one cell; the midpoint identifies it.
    let mut a = vec![vec![FieldElem::zero(); n]; n];
    for (i, w) in cuts.windows(2).enumerate() {
        let mid = &(&w[0] + &w[1]) / &two;
        for b in map.branches().iter().filter(|b| mid < b.image_hi) {
            let j = skeleton.cell_of(&b.preimage(&mid));
            a[i][j] = &a[i][j] + &inv_s;
        }
        a[i][i] = &a[i][i] - &FieldElem::one();
    }
    let basis = linalg::nullspace(&a);
    if basis.len() != 1 {
        return Err(Error::NoPositiveFixedPoint(format!(
            "fixed-point space of {map} has dimension {}",
            basis.len()
        )));
    }
    let mut v = basis.into_iter().next().unwrap();
    if v.iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.signum() < 0)
    {
        v = v.iter().map(|x| -x).collect();
    }
    if v.iter().any(|x| x.signum() < 0) {
        return Err(Error::NoPositiveFixedPoint(format!(
            "fixed point of {map} changes sign"
        )));
    }
    Ok(PiecewiseConstantFn::new(cuts, v)?.normalized()?.merged())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::transfer::is_invariant_density;
    use crate::maps::compose;

    fn q(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    fn comp(v: &[&str]) -> PiecewiseAffineMap {
        compose(&v.iter().map(|s| q(s)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn examples() {
        let f = solve_density_exact(&comp(&["3", "7/3"])).unwrap();
        assert_eq!(f.values(), &[q("9/7"), q("6/7")]);
        let f = solve_density_exact(&comp(&["4/3", "9/2"])).unwrap();
        assert_eq!(f.values(), &[q("8/7"), q("6/7")]);
        assert_eq!(f.breakpoints(), &[q("0"), q("1/2"), q("1")]);
        let f = solve_density_exact(&comp(&["5"])).unwrap();
        assert_eq!(f, PiecewiseConstantFn::constant(q("1")));
    }

    #[test]
    fn quadratic_map() {
        let beta = FieldElem::quadratic(3, 1, 4, 13).unwrap();
        let m = compose(&[q("2"), beta]).unwrap();
        let f = solve_density_exact(&m).unwrap();
        assert!(is_invariant_density(&m, &f).unwrap());
        assert!(f.cells() >= 2);
    }

    #[test]
    fn infinite_orbit_is_rejected() {
        let err = solve_density_exact(&comp(&["5/3", "7/4"])).unwrap_err();
        assert!(matches!(err, Error::OrbitNotFinite(_)));
    }
}
