use std::sync::Arc;

use crate::domain::{CommLedger, CumulativePayoff, ExpertIndex, PayoffVector};
use crate::error::{Error, Result};
use crate::forecasters::{perturbed_choice, FplState};
use crate::rng::{RngStream, StreamId};
use crate::scalar::Scalar;

use super::params::{block_schedule, DfplParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Step,
    Block,
}

/// What happened on a call to [`DfplState::choose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEvent {
    /// Zero-based index of the current block.
    pub block: usize,
    pub phase: Phase,
    /// True on the first step of a block.
    pub started: bool,
}

#[derive(Debug, Clone)]
enum Mode<S> {
    Step(Box<FplState<S>>),
    Block(ExpertIndex),
}

#[derive(Debug, Clone)]
struct OpenBlock<S> {
    index: usize,
    len: usize,
    played: usize,
    mode: Mode<S>,
}

/// One two-expert DFPL instance.
#[derive(Debug, Clone)]
pub struct DfplState<S> {
    params: DfplParams<S>,
    schedule: Arc<[usize]>,
    seed: u64,
    node: u32,
    // Q^i, and its gap, which alone drives block-phase choices
    totals: CumulativePayoff<S>,
    totals_gap: S,
    // P^i
    block_payoff: CumulativePayoff<S>,
    open: Option<OpenBlock<S>>,
    next_block: usize,
    phase_rng: RngStream,
    noise_rng: RngStream,
    awaiting_payoff: bool,
    steps: usize,
    phases: Vec<Phase>,
    step_phase_steps: u64,
}

impl<S: Scalar> DfplState<S> {
    /// An instance over equal blocks of `params.block_len` covering `params.horizon`.
    pub fn new(params: DfplParams<S>, seed: u64) -> Self {
        let schedule: Arc<[usize]> = block_schedule(params.horizon, params.block_len, None).into();
        Self::with_schedule(params, schedule, seed, 0)
    }

    /// An instance following an externally supplied block schedule. `node`
    /// keys this instance's random streams.
    pub fn with_schedule(params: DfplParams<S>, schedule: Arc<[usize]>, seed: u64, node: u32) -> Self {
        Self {
            schedule,
            seed,
            node,
            totals: CumulativePayoff::zeros(2),
            totals_gap: S::zero(),
            block_payoff: CumulativePayoff::zeros(2),
            open: None,
            next_block: 0,
            phase_rng: RngStream::new(seed, StreamId::Phase(node)),
            noise_rng: RngStream::new(seed, StreamId::Learner(node)),
            awaiting_payoff: false,
            steps: 0,
            phases: Vec::with_capacity(params.blocks),
            step_phase_steps: 0,
            params,
        }
    }

    pub fn params(&self) -> &DfplParams<S> {
        &self.params
    }

    /// Block-level cumulative payoff `Q` over all finished blocks.
    pub fn totals(&self) -> &CumulativePayoff<S> {
        &self.totals
    }

    /// Payoff accumulated so far inside the open block.
    pub fn block_payoff(&self) -> &CumulativePayoff<S> {
        &self.block_payoff
    }

    /// The phase drawn for every block started so far.
    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn current_phase(&self) -> Option<Phase> {
        self.open.as_ref().map(|b| match b.mode {
            Mode::Step(_) => Phase::Step,
            Mode::Block(_) => Phase::Block,
        })
    }

    /// Draws the phase of the next block and prepares its learner.
    pub fn start_block(&mut self) -> Result<()> {
        let step = self.steps + 1;
        if self.open.is_some() {
            return Err(Error::Protocol { step, detail: "block started before the previous one finished".into() });
        }
        let Some(&len) = self.schedule.get(self.next_block) else {
            return Err(Error::Protocol { step, detail: "block schedule exhausted".into() });
        };
        let index = self.next_block;
        let step_phase = self.phase_rng.bernoulli(self.params.step_probability.as_f64());
        let mode = if step_phase {
            let rng = RngStream::new(self.seed, StreamId::StepLearner { node: self.node, block: index as u32 });
            Mode::Step(Box::new(FplState::new(2, self.params.eta_prime, rng)?))
        } else {
            Mode::Block(perturbed_choice(self.totals_gap, self.params.eta, &mut self.noise_rng)?)
        };
        self.phases.push(if step_phase { Phase::Step } else { Phase::Block });
        self.block_payoff = CumulativePayoff::zeros(2);
        self.open = Some(OpenBlock { index, len, played: 0, mode });
        self.next_block += 1;
        Ok(())
    }

    /// Picks the expert for the next step, opening a block if none is open.
    pub fn choose(&mut self) -> Result<(ExpertIndex, BlockEvent)> {
        let step = self.steps + 1;
        if self.awaiting_payoff {
            return Err(Error::Protocol { step, detail: "choice requested twice without a payoff".into() });
        }
        let started = self.open.is_none();
        if started {
            self.start_block()?;
        }
        let block = self.open.as_mut().expect("block opened above");
        let (action, phase) = match &mut block.mode {
            Mode::Step(fpl) => (fpl.choose()?, Phase::Step),
            Mode::Block(a) => (*a, Phase::Block),
        };
        self.awaiting_payoff = true;
        Ok((action, BlockEvent { block: block.index, phase, started }))
    }

    /// Feeds the payoff of the step just chosen. Returns true when this step
    /// closed its block (at which point `Q` has absorbed the block payoff).
    pub fn on_payoff(&mut self, p: &PayoffVector<S>) -> Result<bool> {
        let step = self.steps + 1;
        if !self.awaiting_payoff {
            return Err(Error::Protocol { step, detail: "payoff delivered before a choice".into() });
        }
        if p.len() != 2 {
            return Err(Error::UnsupportedArity { expected: 2, got: p.len() });
        }
        let block = self.open.as_mut().expect("a choice always opens a block");
        if let Mode::Step(fpl) = &mut block.mode {
            fpl.update(p)?;
            self.step_phase_steps += 1;
        }
        self.block_payoff.add(p)?;
        block.played += 1;
        self.awaiting_payoff = false;
        self.steps += 1;
        if block.played == block.len {
            self.totals.merge(&self.block_payoff);
            let s = self.block_payoff.as_slice();
            self.totals_gap = self.totals_gap + (s[0] - s[1]);
            self.open = None;
            return Ok(true);
        }
        Ok(false)
    }

    /// Messages this instance has cost so far under the fixed convention:
    /// `k` for each block-start broadcast, `k` for each block-end collection,
    /// and two per step-phase step.
    pub fn communication(&self, sites: usize) -> CommLedger {
        let mut ledger = CommLedger::new(2);
        let started = self.phases.len() as u64;
        let finished = started - u64::from(self.open.is_some());
        ledger.record(started * sites as u64, 2);
        ledger.record(finished * sites as u64, 2);
        ledger.record(2 * self.step_phase_steps, 2);
        ledger
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(a: f64, b: f64) -> PayoffVector<f64> {
        PayoffVector::pair(a, b).unwrap()
    }

    fn params(horizon: usize, ell: usize, q: f64) -> DfplParams<f64> {
        DfplParams::with_tuned_noise(horizon, ell).unwrap().with_step_probability(q).unwrap()
    }

    #[test]
    fn q_zero_is_always_block_phase() {
        let mut s = DfplState::new(params(400, 20, 0.0), 1);
        for _ in 0..400 {
            s.choose().unwrap();
            s.on_payoff(&pv(1.0, 0.0)).unwrap();
        }
        assert!(s.phases().iter().all(|p| *p == Phase::Block));
        assert_eq!(s.phases().len(), 20);
    }

    #[test]
    fn q_one_is_always_step_phase() {
        let mut s = DfplState::new(params(400, 20, 1.0), 1);
        for _ in 0..400 {
            s.choose().unwrap();
            s.on_payoff(&pv(0.0, 1.0)).unwrap();
        }
        assert!(s.phases().iter().all(|p| *p == Phase::Step));
    }

    #[test]
    fn step_phase_count_matches_binomial() {
        let p = DfplParams::<f64>::with_tuned_noise(65536, 16).unwrap();
        let q = p.step_probability;
        let mut s = DfplState::new(p, 2024);
        for _ in 0..4096 {
            s.start_block().unwrap();
            for _ in 0..16 {
                s.choose().unwrap();
                s.on_payoff(&pv(0.5, 0.5)).unwrap();
            }
        }
        let steps = s.phases().iter().filter(|p| **p == Phase::Step).count() as f64;
        let mean = q * 4096.0;
        let sd = (4096.0 * q * (1.0 - q)).sqrt();
        assert!((mean - 406.3).abs() < 0.5);
        assert!((steps - mean).abs() <= 3.0 * sd, "{steps} vs {mean}±{sd}");
    }

    #[test]
    fn block_phase_plays_one_action() {
        let mut s = DfplState::new(params(300, 30, 0.0), 9);
        let mut seq = vec![];
        for t in 0..300 {
            let (a, ev) = s.choose().unwrap();
            assert_eq!(ev.phase, Phase::Block);
            assert_eq!(ev.started, t % 30 == 0);
            seq.push(a);
            s.on_payoff(&pv(if t % 7 == 0 { 1.0 } else { 0.2 }, 0.6)).unwrap();
        }
        for chunk in seq.chunks(30) {
            assert!(chunk.iter().all(|a| *a == chunk[0]));
        }
    }

    #[test]
    fn totals_track_finished_blocks() {
        let mut s = DfplState::new(params(120, 12, 0.5), 4);
        let mut running = [0.0, 0.0];
        for t in 0..120 {
            s.choose().unwrap();
            let p = pv((t % 3) as f64 / 2.0, (t % 5) as f64 / 4.0);
            running[0] += p.as_slice()[0];
            running[1] += p.as_slice()[1];
            if s.on_payoff(&p).unwrap() {
                let q = s.totals().as_slice();
                assert!((q[0] - running[0]).abs() < 1e-9 && (q[1] - running[1]).abs() < 1e-9);
            }
        }
        assert_eq!(s.totals().updates(), 120);
    }

    #[test]
    fn step_phase_on_constant_payoffs_has_small_regret() {
        // E[regret] <= 2 sqrt(ell) on each step-phase block
        let ell = 64;
        let mut total = 0.0;
        let runs = 200;
        for seed in 0..runs {
            let mut s = DfplState::new(params(ell, ell, 1.0), seed);
            let mut got = 0.0;
            for _ in 0..ell {
                let (a, _) = s.choose().unwrap();
                let p = pv(1.0, 0.0);
                got += p.get(a);
                s.on_payoff(&p).unwrap();
            }
            total += ell as f64 - got;
        }
        assert!(total / runs as f64 <= 2.0 * (ell as f64).sqrt());
    }

    #[test]
    fn step_phase_gains_against_the_global_leader() {
        // expert 2 wins the block by ell/2; regret w.r.t. expert 1 turns negative
        let ell = 64;
        let mut sum = 0.0;
        let runs = 200;
        for seed in 0..runs {
            let mut s = DfplState::new(params(ell, ell, 1.0), seed);
            let (mut got, mut first) = (0.0, 0.0);
            for t in 0..ell {
                let (a, _) = s.choose().unwrap();
                let p = if t < ell / 4 { pv(1.0, 0.0) } else { pv(0.0, 1.0) };
                got += p.get(a);
                first += p.as_slice()[0];
                s.on_payoff(&p).unwrap();
            }
            sum += first - got;
        }
        assert!(sum / (runs as f64) < 0.0);
    }

    #[test]
    fn out_of_order_calls_fail() {
        let mut s = DfplState::new(params(20, 10, 0.0), 0);
        assert!(matches!(s.on_payoff(&pv(1.0, 0.0)), Err(Error::Protocol { step: 1, .. })));
        s.choose().unwrap();
        assert!(matches!(s.choose(), Err(Error::Protocol { step: 1, .. })));
        assert!(s.start_block().is_err());
    }

    #[test]
    fn schedule_exhaustion_is_an_error() {
        let mut s = DfplState::new(params(10, 10, 0.0), 0);
        for _ in 0..10 {
            s.choose().unwrap();
            s.on_payoff(&pv(1.0, 0.0)).unwrap();
        }
        assert!(matches!(s.choose(), Err(Error::Protocol { step: 11, .. })));
    }

    #[test]
    fn communication_convention() {
        let (t, ell, k) = (200, 10, 5);
        let mut block_only = DfplState::new(params(t, ell, 0.0), 0);
        let mut step_only = DfplState::new(params(t, ell, 1.0), 0);
        for _ in 0..t {
            for s in [&mut block_only, &mut step_only] {
                s.choose().unwrap();
                s.on_payoff(&pv(0.0, 1.0)).unwrap();
            }
        }
        let b = (t / ell) as u64;
        assert_eq!(block_only.communication(k).messages, 2 * k as u64 * b);
        assert_eq!(step_only.communication(k).messages, 2 * k as u64 * b + 2 * t as u64);
    }
}
