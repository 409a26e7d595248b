use crate::domain::{argmax_selector, CumulativePayoff, ExpertIndex, PayoffVector};
use crate::error::{invalid, Error, Result};
use crate::rng::{uniform_noise, RngStream};
use crate::scalar::Scalar;

/// Two-expert perturbed-leader draw: `M(totals + r)` with `r` uniform on
/// `[0, eta]^2`, expressed through the cumulative gap `totals[1] - totals[2]`.
///
/// Shifting both totals by a common amount leaves the choice unchanged, so the
/// selector sees `(gap + r1, r2)`.
pub fn perturbed_choice<S: Scalar>(gap: S, eta: S, rng: &mut RngStream) -> Result<ExpertIndex> {
    let r = uniform_noise(eta, 2, rng)?;
    argmax_selector(&[gap + r[0], r[1]])
}

/// Follow the perturbed leader with fresh noise on every choice.
#[derive(Debug, Clone)]
pub struct FplState<S> {
    cumulative: CumulativePayoff<S>,
    // running p[1] - p[2]; choices depend on nothing else
    gap: S,
    eta: S,
    rng: RngStream,
}

impl<S: Scalar> FplState<S> {
    pub fn new(experts: usize, eta: S, rng: RngStream) -> Result<Self> {
        if !(eta > S::zero()) || !eta.is_finite() {
            return invalid(format!("FPL noise must be positive and finite, got {eta}"));
        }
        if experts < 2 {
            return invalid(format!("FPL needs at least 2 experts, got {experts}"));
        }
        Ok(Self { cumulative: CumulativePayoff::zeros(experts), gap: S::zero(), eta, rng })
    }

    pub fn choose(&mut self) -> Result<ExpertIndex> {
        if self.cumulative.len() != 2 {
            return Err(Error::UnsupportedArity { expected: 2, got: self.cumulative.len() });
        }
        perturbed_choice(self.gap, self.eta, &mut self.rng)
    }

    pub fn update(&mut self, p: &PayoffVector<S>) -> Result<()> {
        self.cumulative.add(p)?;
        if p.len() == 2 {
            self.gap = self.gap + (p.as_slice()[0] - p.as_slice()[1]);
        }
        Ok(())
    }

    pub fn cumulative(&self) -> &CumulativePayoff<S> {
        &self.cumulative
    }

    pub fn gap(&self) -> S {
        self.gap
    }

    pub fn eta(&self) -> S {
        self.eta
    }
}
