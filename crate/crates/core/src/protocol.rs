//! The star network seen by a distributed forecaster, and the trait every
//! algorithm implements to be driven by the simulator.

use std::fmt;

use crate::domain::{CommLedger, ExpertIndex, PayoffVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Who picks the expert each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// The queried site chooses and is the only node that sees the payoff.
    SitePrediction,
    /// The coordinator chooses; one site observes the payoff.
    CoordinatorPrediction,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::SitePrediction => "site",
            ModelKind::CoordinatorPrediction => "coordinator",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "site" | "site_prediction" => Ok(ModelKind::SitePrediction),
            "coordinator" | "coordinator_prediction" => Ok(ModelKind::CoordinatorPrediction),
            other => Err(Error::Config(format!("unknown model `{other}` (expected site or coordinator)"))),
        }
    }
}

/// Site-to-coordinator links with zero delay. Sites never address each other.
///
/// Every send is one message (a broadcast is `sites()` messages) carrying
/// `reals` real numbers.
pub trait Channel {
    fn sites(&self) -> usize;
    fn to_coordinator(&mut self, from: usize, reals: usize);
    fn to_site(&mut self, to: usize, reals: usize);
    fn broadcast(&mut self, reals: usize);
}

/// Read-only view of when communication happened, for adaptive adversaries.
pub trait CommObservation {
    /// Whether any message was sent in steps `from..current` (1-based,
    /// current step excluded).
    fn any_messages_since(&self, from: usize) -> bool;
}

/// A channel the simulator can drive: it also exposes the per-step clock,
/// the communication view and the final ledger.
pub trait Network: Channel + CommObservation {
    fn begin_step(&mut self, t: usize);
    fn messages_this_step(&self) -> u64;
    fn ledger(&self) -> CommLedger;
}

/// The exact star network: counts every message into a [`CommLedger`].
#[derive(Debug, Clone)]
pub struct StarChannel {
    sites: usize,
    ledger: CommLedger,
    step: usize,
    step_messages: u64,
    // last completed step that carried a message
    last_message_step: Option<usize>,
}

impl StarChannel {
    pub fn new(sites: usize, experts: usize) -> Self {
        Self {
            sites,
            ledger: CommLedger::new(experts),
            step: 0,
            step_messages: 0,
            last_message_step: None,
        }
    }

    fn record(&mut self, count: u64, reals: usize) {
        if count == 0 {
            return;
        }
        self.ledger.record(count, reals);
        self.step_messages += count;
    }
}

impl Channel for StarChannel {
    fn sites(&self) -> usize {
        self.sites
    }

    fn to_coordinator(&mut self, from: usize, reals: usize) {
        debug_assert!(from < self.sites);
        self.record(1, reals);
    }

    fn to_site(&mut self, to: usize, reals: usize) {
        debug_assert!(to < self.sites);
        self.record(1, reals);
    }

    fn broadcast(&mut self, reals: usize) {
        self.record(self.sites as u64, reals);
    }
}

impl CommObservation for StarChannel {
    fn any_messages_since(&self, from: usize) -> bool {
        matches!(self.last_message_step, Some(s) if s >= from)
    }
}

impl Network for StarChannel {
    fn begin_step(&mut self, t: usize) {
        if self.step_messages > 0 {
            self.last_message_step = Some(self.step);
        }
        self.step = t;
        self.step_messages = 0;
    }

    fn messages_this_step(&self) -> u64 {
        self.step_messages
    }

    fn ledger(&self) -> CommLedger {
        self.ledger
    }
}

/// A distributed forecaster driven one round at a time.
///
/// Each round the simulator calls `choose` (at the queried site, or at the
/// coordinator in the coordinator model) and then `observe` at the site that
/// sees the payoff. All communication goes through the supplied channel.
pub trait Protocol<S: Scalar>: Send {
    fn name(&self) -> &'static str;
    fn model(&self) -> ModelKind;
    fn choose(&mut self, t: usize, site: usize, channel: &mut dyn Channel) -> Result<ExpertIndex>;
    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, channel: &mut dyn Channel) -> Result<()>;
}

/// Enforces the choose-then-observe order within each round.
#[derive(Debug, Clone, Default)]
pub struct RoundGuard {
    pending: Option<usize>,
    last: usize,
}

impl RoundGuard {
    pub fn begin(&mut self, t: usize) -> Result<()> {
        if let Some(p) = self.pending {
            return Err(Error::Protocol { step: t, detail: format!("choice requested while step {p} awaits its payoff") });
        }
        if t <= self.last {
            return Err(Error::Protocol { step: t, detail: format!("step {t} does not follow step {}", self.last) });
        }
        self.pending = Some(t);
        Ok(())
    }

    pub fn end(&mut self, t: usize) -> Result<()> {
        match self.pending {
            Some(p) if p == t => {
                self.pending = None;
                self.last = t;
                Ok(())
            }
            Some(p) => Err(Error::Protocol { step: t, detail: format!("payoff for step {t} while step {p} is open") }),
            None => Err(Error::Protocol { step: t, detail: "payoff delivered before any choice".into() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_counts_every_site() {
        let mut c = StarChannel::new(5, 2);
        c.begin_step(1);
        c.broadcast(2);
        c.to_coordinator(0, 1);
        assert_eq!(c.messages_this_step(), 6);
        assert_eq!(c.ledger().messages, 6);
        assert_eq!(c.ledger().reals_sent, 11);
    }

    #[test]
    fn observation_excludes_current_step() {
        let mut c = StarChannel::new(2, 2);
        c.begin_step(1);
        assert!(!c.any_messages_since(1));
        c.to_site(1, 2);
        assert!(!c.any_messages_since(1));
        c.begin_step(2);
        assert!(c.any_messages_since(1));
        assert!(!c.any_messages_since(2));
        c.begin_step(3);
        assert!(c.any_messages_since(1));
        assert!(!c.any_messages_since(2));
    }

    #[test]
    fn guard_enforces_order() {
        let mut g = RoundGuard::default();
        assert!(g.end(1).is_err());
        g.begin(1).unwrap();
        assert!(matches!(g.begin(2), Err(Error::Protocol { step: 2, .. })));
        assert!(g.end(2).is_err());
        g.end(1).unwrap();
        assert!(g.begin(1).is_err());
        g.begin(2).unwrap();
    }

    #[test]
    fn model_parses() {
        assert_eq!("site".parse::<ModelKind>().unwrap(), ModelKind::SitePrediction);
        assert_eq!("coordinator".parse::<ModelKind>().unwrap(), ModelKind::CoordinatorPrediction);
        assert!("mesh".parse::<ModelKind>().is_err());
    }
}
