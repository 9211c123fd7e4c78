//! Seeded random streams.
//!
//! Every draw comes from a ChaCha8 generator keyed by the user seed and a
//! 64-bit stream id built from `(experiment, index, purpose)`. Streams are
//! independent, so a trial produces the same numbers whether trials run in
//! sequence or in parallel.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Experiment part of a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Experiment {
    CsNoiseless = 1,
    CsNoisy = 2,
    CsTable = 3,
    Tradeoff = 4,
    Logistic = 5,
    Covsel = 6,
    CovselTable = 7,
}

/// What the numbers are used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Matrix = 1,
    Signal = 2,
    Observation = 3,
    Start = 4,
    Pattern = 5,
    Noise = 6,
}

/// Stream id: experiment in bits 56..64, purpose in bits 48..56, index in
/// bits 0..48.
pub fn stream_id(experiment: Experiment, index: u64, purpose: Purpose) -> u64 {
    ((experiment as u64) << 56) | ((purpose as u64) << 48) | (index & ((1 << 48) - 1))
}

/// Index of `trial` within the group `group` (a cardinality, a density
/// slot, ...).
pub fn trial_index(group: u64, trial: u64) -> u64 {
    (group << 24) | (trial & ((1 << 24) - 1))
}

/// A ChaCha8 stream with a Box-Muller Gaussian sampler.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64, experiment: Experiment, index: u64, purpose: Purpose) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(experiment, index, purpose));
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; the second value of each pair is
    /// kept for the next call.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn gaussian_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.gaussian()).collect()
    }

    /// `amount` distinct indices from `0..len`, ascending.
    pub fn sample_indices(&mut self, len: usize, amount: usize) -> Vec<usize> {
        let mut idx = rand::seq::index::sample(&mut self.rng, len, amount).into_vec();
        idx.sort_unstable();
        idx
    }

    /// Uniformly random permutation of `0..len`.
    pub fn permutation(&mut self, len: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..len).collect();
        idx.shuffle(&mut self.rng);
        idx
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }
}
