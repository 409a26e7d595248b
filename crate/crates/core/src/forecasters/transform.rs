use crate::domain::PayoffVector;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Moves the common part of a two-expert payoff onto nobody: the larger entry
/// becomes the difference, the smaller becomes zero. FPL's choices depend
/// only on cumulative differences, so they are unchanged by this map.
pub fn difference_transform<S: Scalar>(p: &PayoffVector<S>) -> Result<PayoffVector<S>> {
    if p.len() != 2 {
        return Err(Error::UnsupportedArity { expected: 2, got: p.len() });
    }
    let (a, b) = (p.as_slice()[0], p.as_slice()[1]);
    if a >= b {
        PayoffVector::pair(a - b, S::zero())
    } else {
        PayoffVector::pair(S::zero(), b - a)
    }
}

/// Probability that two-expert FPL with noise `eta` picks expert 1 when the
/// cumulative gap `P[1] - P[2]` equals `gap`.
pub fn fpl_choice_probability<S: Scalar>(gap: S, eta: S) -> Result<S> {
    if !(eta > S::zero()) || !eta.is_finite() {
        return invalid(format!("noise magnitude must be positive, got {eta}"));
    }
    if gap.is_nan() {
        return invalid("gap is NaN");
    }
    let half = S::lit(0.5);
    let x = gap / eta;
    Ok(if x > S::one() {
        S::one()
    } else if x >= S::zero() {
        S::one() - half * (S::one() - x).powi(2)
    } else if x >= -S::one() {
        half * (S::one() + x).powi(2)
    } else {
        S::zero()
    })
}
