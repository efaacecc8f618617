//! Reproducible random streams, Rayleigh channels and complex AWGN.
//!
//! A [`RandomStream`] is a ChaCha8 generator keyed by the master seed and
//! positioned on one of its 2^64 independent streams. Simulation work is
//! split into blocks and each block draws from its own stream id, so the
//! sampled sequence never depends on how blocks are scheduled.
//!
//! Gaussian variates come from the ziggurat sampler of `rand_distr`
//! (`StandardNormal`, rand_distr 0.5). Changing either generator or
//! sampler changes every seeded result.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::ComplexSample;

/// Stream-id namespaces. The top byte of a stream id says what it is for.
pub mod tag {
    pub const SER_BLOCK: u64 = 0x01 << 56;
    pub const ALPHA_SAMPLES: u64 = 0x02 << 56;
    pub const CHECK: u64 = 0x7f << 56;
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        RandomStream {
            master_seed,
            stream_id,
            rng,
        }
    }

    /// Stream `index` inside the namespace `tag`.
    pub fn tagged(master_seed: u64, tag: u64, index: u64) -> Self {
        debug_assert!(index < 1 << 56);
        Self::new(master_seed, tag | index)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circularly-symmetric complex Gaussian with unit variance, CN(0, 1).
    pub fn complex_normal(&mut self) -> ComplexSample {
        let re = self.standard_normal();
        let im = self.standard_normal();
        ComplexSample::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: u32) -> usize {
        self.rng.random_range(0..n) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<ComplexSample>,
}

impl ChannelVector {
    pub fn new(entries: Vec<ComplexSample>) -> Self {
        ChannelVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_l1(&self) -> f64 {
        self.entries.iter().map(|h| h.norm()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// i.i.d. CN(0, 1) channel of length `n`.
pub fn draw_channel(n: usize, stream: &mut RandomStream) -> ChannelVector {
    let mut entries = Vec::with_capacity(n);
    fill_channel(&mut entries, n, stream);
    ChannelVector { entries }
}

/// Refills `entries` in place with `n` fresh CN(0, 1) taps.
pub fn fill_channel(entries: &mut Vec<ComplexSample>, n: usize, stream: &mut RandomStream) {
    entries.clear();
    entries.extend((0..n).map(|_| stream.complex_normal()));
}

/// CN(0, σ²) noise sample.
pub fn draw_noise(sigma2: f64, stream: &mut RandomStream) -> Result<ComplexSample> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidSigma(sigma2));
    }
    Ok(stream.complex_normal() * libm::sqrt(sigma2))
}
