//! Seedable per-actor random streams.
//!
//! Each logical actor (adversary, coordinator, every site, every learner copy)
//! draws from its own ChaCha stream keyed by `(seed, stream_id)`, so adding an
//! actor never perturbs the draws of another.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Named stream identifiers. The numeric layout is stable across releases
/// because stored traces are replayed against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Adversary,
    /// Block-length jitter schedule shared by every DFPL node of a run.
    Schedule,
    /// Coordinator-side sync decisions (mini-batch).
    Sync,
    /// Perturbation draws of learner copy `i` (a site, an FPL instance, or a DFPL node).
    Learner(u32),
    /// Bernoulli phase draws of DFPL node `i`.
    Phase(u32),
    /// Sampling decisions of site `i` (label-efficient forecaster).
    Sampler(u32),
    /// The fresh step-phase FPL copy of DFPL node `node` on block `block`.
    StepLearner { node: u32, block: u32 },
    Custom(u32),
}

impl StreamId {
    pub fn id(self) -> u64 {
        match self {
            StreamId::Adversary => 1,
            StreamId::Schedule => 2,
            StreamId::Sync => 3,
            StreamId::Learner(i) => (1 << 32) | u64::from(i),
            StreamId::Phase(i) => (2 << 32) | u64::from(i),
            StreamId::Sampler(i) => (3 << 32) | u64::from(i),
            StreamId::Custom(i) => (4 << 32) | u64::from(i),
            StreamId::StepLearner { node, block } => (1 << 63) | (u64::from(node) << 32) | u64::from(block),
        }
    }
}

/// A deterministic random stream: identical `(seed, stream_id)` pairs yield
/// identical draw sequences.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: StreamId) -> Self {
        Self::with_raw_id(seed, stream.id())
    }

    pub fn with_raw_id(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on `[0, hi]`; returns zero when `hi == 0`.
    pub fn uniform_upto<S: Scalar>(&mut self, hi: S) -> S {
        if hi == S::zero() {
            return S::zero();
        }
        self.rng.gen_range(S::zero()..=hi)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.rng.gen_bool(p)
        }
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen::<bool>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Draws `dim` independent coordinates uniformly from `[0, eta]`.
pub fn uniform_noise<S: Scalar>(eta: S, dim: usize, rng: &mut RngStream) -> Result<Vec<S>> {
    if !(eta >= S::zero()) || !eta.is_finite() {
        return invalid(format!("noise magnitude must be finite and non-negative, got {eta}"));
    }
    if dim == 0 {
        return invalid("noise dimension must be at least 1");
    }
    Ok((0..dim).map(|_| rng.uniform_upto(eta)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn zero_eta_is_zero_vector() {
        let mut rng = RngStream::new(7, StreamId::Learner(0));
        assert_eq!(uniform_noise(0.0f64, 2, &mut rng).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn seeded_noise_replays() {
        let mut a = RngStream::new(42, StreamId::Learner(3));
        let mut b = RngStream::new(42, StreamId::Learner(3));
        let x = uniform_noise(8.0f64, 2, &mut a).unwrap();
        let y = uniform_noise(8.0f64, 2, &mut b).unwrap();
        assert_eq!(x, y);
        assert!(x.iter().all(|v| (0.0..=8.0).contains(v)));
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, StreamId::Learner(0));
        let mut b = RngStream::new(42, StreamId::Learner(1));
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn noise_mean_is_half_eta() {
        let mut rng = RngStream::new(1, StreamId::Custom(0));
        let draws = 100_000;
        let mut sums = [0.0f64; 2];
        for _ in 0..draws {
            let r = uniform_noise(1.0f64, 2, &mut rng).unwrap();
            sums[0] += r[0];
            sums[1] += r[1];
        }
        for s in sums {
            assert!((s / draws as f64 - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn negative_eta_rejected() {
        let mut rng = RngStream::new(1, StreamId::Custom(0));
        assert!(matches!(uniform_noise(-1.0f64, 2, &mut rng), Err(Error::InvalidArgument(_))));
        assert!(matches!(uniform_noise(f64::NAN, 2, &mut rng), Err(Error::InvalidArgument(_))));
        assert!(uniform_noise(1.0f64, 0, &mut rng).is_err());
    }

    #[test]
    fn stream_ids_do_not_collide() {
        let ids = [
            StreamId::Adversary,
            StreamId::Schedule,
            StreamId::Sync,
            StreamId::Learner(0),
            StreamId::Phase(0),
            StreamId::Sampler(0),
            StreamId::Custom(0),
            StreamId::StepLearner { node: 0, block: 0 },
        ];
        let mut raw: Vec<u64> = ids.iter().map(|s| s.id()).collect();
        raw.sort_unstable();
        raw.dedup();
        assert_eq!(raw.len(), ids.len());
    }
}
