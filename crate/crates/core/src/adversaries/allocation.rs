use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Which site receives the query (and the payoff) each round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SiteAllocation {
    /// Round `t` goes to site `(t - 1) mod k`.
    Cyclic,
    /// Cyclic over the first `m` sites only.
    CyclicOver(usize),
    /// Every round goes to site 0.
    SingleSite,
    /// Each block of `k` rounds visits every site once in a fresh uniform order.
    PermutationPerBlock,
}

impl SiteAllocation {
    pub fn name(&self) -> String {
        match self {
            SiteAllocation::Cyclic => "cyclic".into(),
            SiteAllocation::CyclicOver(m) => format!("cyclic{m}"),
            SiteAllocation::SingleSite => "single".into(),
            SiteAllocation::PermutationPerBlock => "permutation".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(SiteAllocation::Cyclic),
            "single" | "single_site" => Ok(SiteAllocation::SingleSite),
            "permutation" | "permutation_per_block" => Ok(SiteAllocation::PermutationPerBlock),
            other => match other.strip_prefix("cyclic").and_then(|m| m.parse::<usize>().ok()) {
                Some(m) if m >= 1 => Ok(SiteAllocation::CyclicOver(m)),
                _ => invalid(format!("unknown site allocation `{other}`")),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Allocator {
    allocation: SiteAllocation,
    sites: usize,
    order: Vec<usize>,
}

impl Allocator {
    pub(crate) fn new(allocation: SiteAllocation, sites: usize, horizon: usize) -> Result<Self> {
        if sites == 0 {
            return invalid("at least one site is required");
        }
        match allocation {
            SiteAllocation::CyclicOver(m) if m == 0 || m > sites => {
                return invalid(format!("cannot cycle over {m} of {sites} sites"));
            }
            SiteAllocation::PermutationPerBlock if !horizon.is_multiple_of(sites) => {
                return invalid(format!("permutation blocks need T={horizon} divisible by k={sites}"));
            }
            _ => {}
        }
        Ok(Self { allocation, sites, order: (0..sites).collect() })
    }

    pub(crate) fn site(&mut self, t: usize, rng: &mut RngStream) -> usize {
        match self.allocation {
            SiteAllocation::Cyclic => (t - 1) % self.sites,
            SiteAllocation::CyclicOver(m) => (t - 1) % m,
            SiteAllocation::SingleSite => 0,
            SiteAllocation::PermutationPerBlock => {
                let pos = (t - 1) % self.sites;
                if pos == 0 {
                    self.order.sort_unstable();
                    rng.shuffle(&mut self.order);
                }
                self.order[pos]
            }
        }
    }
}
