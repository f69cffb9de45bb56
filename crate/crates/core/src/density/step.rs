use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::FieldElem;
use crate::error::{Error, Result};

/// A step function on `[0, 1)`: value `values[i]` on `[breakpoints[i], breakpoints[i+1])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiecewiseConstantFn {
    breakpoints: Vec<FieldElem>,
    values: Vec<FieldElem>,
}

impl PiecewiseConstantFn {
    pub fn new(breakpoints: Vec<FieldElem>, values: Vec<FieldElem>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidArgument(
                "need n + 1 breakpoints for n values".into(),
            ));
        }
        if !breakpoints[0].is_zero() || !breakpoints.last().unwrap().is_one() {
            return Err(Error::InvalidArgument(
                "breakpoints must run from 0 to 1".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if w[0].try_cmp(&w[1])? != std::cmp::Ordering::Less {
                return Err(Error::InvalidArgument(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        for v in &values {
            for b in &breakpoints {
                v.compatible(b)?;
            }
        }
        Ok(PiecewiseConstantFn {
            breakpoints,
            values,
        })
    }

    pub fn constant(v: FieldElem) -> Self {
        PiecewiseConstantFn {
            breakpoints: vec![FieldElem::zero(), FieldElem::one()],
            values: vec![v],
        }
    }

    pub fn breakpoints(&self) -> &[FieldElem] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[FieldElem] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    /// Index of the cell containing `x` in `[0, 1)`.
    pub fn cell_of(&self, x: &FieldElem) -> usize {
        let i = self.breakpoints.partition_point(|b| b <= x);
        i.clamp(1, self.values.len()) - 1
    }

    pub fn eval(&self, x: &FieldElem) -> &FieldElem {
        &self.values[self.cell_of(x)]
    }

    pub fn integral(&self) -> FieldElem {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .fold(FieldElem::zero(), |acc, (v, w)| {
                &acc + &(v * &(&w[1] - &w[0]))
            })
    }

    pub fn scale(&self, c: &FieldElem) -> Self {
        PiecewiseConstantFn {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Divides by the integral, so the result integrates to 1.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.integral();
        if total.signum() <= 0 {
            return Err(Error::NoPositiveFixedPoint(
                "function has non-positive integral".into(),
            ));
        }
        Ok(self.scale(&total.recip()?))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| v.signum() >= 0)
    }

    /// Same function with equal adjacent cells merged.
    pub fn merged(&self) -> Self {
        let mut bps = vec![self.breakpoints[0].clone()];
        let mut vals: Vec<FieldElem> = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            if vals.last() != Some(v) {
                if i > 0 {
                    bps.push(self.breakpoints[i].clone());
                }
                vals.push(v.clone());
            }
        }
        bps.push(FieldElem::one());
        PiecewiseConstantFn {
            breakpoints: bps,
            values: vals,
        }
    }

    /// Union of both breakpoint sets.
    pub fn common_refinement(&self, other: &Self) -> Vec<FieldElem> {
        let set: BTreeSet<FieldElem> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .cloned()
            .collect();
        set.into_iter().collect()
    }

    /// Values on the cells of a refinement of this function's partition.
    pub fn values_on(&self, refinement: &[FieldElem]) -> Vec<FieldElem> {
        refinement[..refinement.len() - 1]
            .iter()
            .map(|x| self.eval(x).clone())
            .collect()
    }

    /// `∫ |f - g|` exactly.
    pub fn l1_exact(&self, other: &Self) -> FieldElem {
        let bps = self.common_refinement(other);
        let a = self.values_on(&bps);
        let b = other.values_on(&bps);
        a.iter()
            .zip(&b)
            .zip(bps.windows(2))
            .fold(FieldElem::zero(), |acc, ((x, y), w)| {
                &acc + &(&(x - y).abs() * &(&w[1] - &w[0]))
            })
    }

    /// First cell of the common refinement where the functions differ, as
    /// `(lo, hi, self value, other value)`.
    pub fn first_difference(
        &self,
        other: &Self,
    ) -> Option<(FieldElem, FieldElem, FieldElem, FieldElem)> {
        let bps = self.common_refinement(other);
        let a = self.values_on(&bps);
        let b = other.values_on(&bps);
        (0..a.len()).find(|&i| a[i] != b[i]).map(|i| {
            (
                bps[i].clone(),
                bps[i + 1].clone(),
                a[i].clone(),
                b[i].clone(),
            )
        })
    }

    /// Equality as functions on `[0, 1)`, ignoring redundant breakpoints.
    pub fn same_function(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }

    /// Breakpoints and values rendered to `f64`.
    pub fn to_f64_steps(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.breakpoints.iter().map(FieldElem::to_f64).collect(),
            self.values.iter().map(FieldElem::to_f64).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    fn step(b: &[&str], v: &[&str]) -> PiecewiseConstantFn {
        PiecewiseConstantFn::new(
            b.iter().map(|s| q(s)).collect(),
            v.iter().map(|s| q(s)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn integral_and_eval() {
        let f = step(&["0", "1/2", "1"], &["4/3", "2/3"]);
        assert_eq!(f.integral(), q("1"));
        assert_eq!(f.eval(&q("0")), &q("4/3"));
        assert_eq!(f.eval(&q("1/2")), &q("2/3"));
        assert_eq!(f.eval(&q("99/100")), &q("2/3"));
    }

    #[test]
    fn merging() {
        let f = step(&["0", "1/4", "1/2", "1"], &["2", "2", "1/2"]);
        assert_eq!(f.merged(), step(&["0", "1/2", "1"], &["2", "1/2"]));
        assert!(f.same_function(&f.merged()));
    }

    #[test]
    fn exact_l1() {
        let f = step(&["0", "1/2", "1"], &["4/3", "2/3"]);
        let g = step(&["0", "1/2", "1"], &["8/7", "6/7"]);
        assert_eq!(f.l1_exact(&g), q("4/21"));
        assert_eq!(f.l1_exact(&PiecewiseConstantFn::constant(q("1"))), q("1/3"));
        assert!(f.l1_exact(&f).is_zero());
        let (lo, hi, a, b) = f.first_difference(&g).unwrap();
        assert_eq!((lo, hi, a, b), (q("0"), q("1/2"), q("4/3"), q("8/7")));
    }

    #[test]
    fn validation() {
        assert!(PiecewiseConstantFn::new(vec![q("0"), q("1/2")], vec![q("1")]).is_err());
        assert!(
            PiecewiseConstantFn::new(vec![q("0"), q("1"), q("1")], vec![q("1"), q("1")]).is_err()
        );
    }
}
