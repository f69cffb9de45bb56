use num_integer::Integer;

use super::PiecewiseConstantFn;
use crate::arith::FieldElem;
use crate::error::{Error, Result};

/// Invariant density of `T_{(p/q) ∘ kq}`:
/// `f = (p-r)/p · (1 + q/(p-r) · 1_{[0, r/q)})` with `r = p mod q`.
///
/// The result does not depend on `k`; `k` is validated only.
pub fn closed_form_density(p: u64, q: u64, k: u64) -> Result<PiecewiseConstantFn> {
    if q <= 1 || p <= q {
        return Err(Error::QNotLessThanP { p, q });
    }
    if p.gcd(&q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let r = p % q;
    let c = FieldElem::ratio(p - r, p);
    let high = &c * &(&FieldElem::one() + &FieldElem::ratio(q, p - r));
    PiecewiseConstantFn::new(
        vec![FieldElem::zero(), FieldElem::ratio(r, q), FieldElem::one()],
        vec![high, c],
    )
}
