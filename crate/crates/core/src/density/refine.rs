use rayon::prelude::*;
use serde::Serialize;

use crate::arith::FieldElem;
use crate::maps::PiecewiseAffineMap;

/// A rank-`k` cell on which `T^k` is affine onto `[0, image_hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalInterval {
    pub lo: FieldElem,
    pub hi: FieldElem,
    pub rank: usize,
    pub image_hi: FieldElem,
    pub full: bool,
    /// This interval and all its ancestors are non-full.
    pub in_d: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refinement {
    pub rank: usize,
    pub intervals: Vec<FundamentalInterval>,
    /// Non-full rank-`k` intervals not contained in a full interval of lower rank.
    pub d_k: Vec<FundamentalInterval>,
}

/// Image heights of the rank-`k + 1` pieces of a rank-`k` cell of height `e`,
/// in left-to-right order.
pub fn child_heights(map: &PiecewiseAffineMap, e: &FieldElem) -> Vec<FieldElem> {
    map.branches()
        .iter()
        .take_while(|b| &b.lo < e)
        .map(|b| {
            if &b.hi <= e {
                b.image_hi.clone()
            } else {
                b.apply(e)
            }
        })
        .collect()
}

fn children(map: &PiecewiseAffineMap, parent: &FundamentalInterval) -> Vec<FundamentalInterval> {
    let scale = map
        .slope()
        .pow(parent.rank as u32)
        .recip()
        .expect("slope > 1");
    let heights = child_heights(map, &parent.image_hi);
    let mut out = Vec::with_capacity(heights.len());
    for (b, h) in map.branches().iter().zip(heights) {
        let lo = &parent.lo + &(&b.lo * &scale);
        let hi = if b.hi >= parent.image_hi {
            parent.hi.clone()
        } else {
            &parent.lo + &(&b.hi * &scale)
        };
        let full = h.is_one();
        out.push(FundamentalInterval {
            lo,
            hi,
            rank: parent.rank + 1,
            image_hi: h,
            full,
            in_d: parent.in_d && !full,
        });
    }
    out
}

/// Rank-`k` fundamental intervals, in order, with the collection `D_k`.
pub fn refine(map: &PiecewiseAffineMap, k: usize) -> Refinement {
    assert!(k >= 1, "rank must be at least 1");
    let mut level: Vec<FundamentalInterval> = map
        .branches()
        .iter()
        .map(|b| FundamentalInterval {
            lo: b.lo.clone(),
            hi: b.hi.clone(),
            rank: 1,
            image_hi: b.image_hi.clone(),
            full: b.is_full(),
            in_d: !b.is_full(),
        })
        .collect();
    for _ in 1..k {
        level = level
            .par_iter()
            .flat_map_iter(|iv| children(map, iv))
            .collect();
    }
    let d_k = level.iter().filter(|iv| iv.in_d).cloned().collect();
    Refinement {
        rank: k,
        intervals: level,
        d_k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::compose;

    fn q(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    #[test]
    fn rank_one_of_seven_thirds_after_three() {
        let m = compose(&[q("3"), q("7/3")]).unwrap();
        let r = refine(&m, 1);
        assert_eq!(r.intervals.len(), 9);
        assert_eq!(r.d_k.len(), 3);
        assert!(r.d_k.iter().all(|iv| iv.image_hi == q("1/3")));
        let r2 = refine(&m, 2);
        assert_eq!(r2.d_k.len(), 3);
    }

    #[test]
    fn rank_k_partitions_unit_interval() {
        let m = compose(&[q("4/3"), q("3/2")]).unwrap();
        for k in 1..=4 {
            let r = refine(&m, k);
            assert!(r.intervals[0].lo.is_zero());
            assert!(r.intervals.last().unwrap().hi.is_one());
            for w in r.intervals.windows(2) {
                assert_eq!(w[0].hi, w[1].lo);
            }
            let slope_k = m.slope().pow(k as u32);
            for iv in &r.intervals {
                assert_eq!(&(&iv.hi - &iv.lo) * &slope_k, iv.image_hi);
            }
        }
    }

    #[test]
    fn integer_map_has_empty_d() {
        let m = compose(&[q("5")]).unwrap();
        assert!(refine(&m, 3).d_k.is_empty());
    }
}
