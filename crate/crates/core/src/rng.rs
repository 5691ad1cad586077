//! Seeded random streams.
//!
//! Every random quantity derives from a single run seed. Distinct purposes
//! draw from distinct ChaCha streams of the same key, so adding draws to one
//! purpose never perturbs another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream identifiers. Values are part of the reproducibility contract.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Stream {
    SensingMatrix = 1,
    Signal = 2,
    CorruptionIndex = 3,
    CorruptionValue = 4,
    HadamardSigns = 5,
    PowerIteration = 6,
    WarmStart = 7,
    Probe = 8,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    stream_with_salt(seed, which, 0)
}

/// Stream for a purpose that needs many independent instances (one per outer
/// iteration, say).
pub fn stream_with_salt(seed: u64, which: Stream, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((which as u64) << 48 ^ salt);
    rng
}

/// Standard normal sampler over any RNG.
pub struct Gaussian<R> {
    rng: R,
}

impl<R: Rng> Gaussian<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }

    pub fn sample(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.sample();
        }
    }

    pub fn vec(&mut self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        self.fill(&mut v);
        v
    }
}

/// Uniformly random point on the unit sphere in ℝⁿ.
pub fn unit_vector<R: Rng>(rng: R, n: usize) -> Vec<f64> {
    let mut g = Gaussian::new(rng);
    loop {
        let mut v = g.vec(n);
        let norm = crate::linalg::norm(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}
