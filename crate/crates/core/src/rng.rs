//! Randomness plumbing.
//!
//! Every random draw made by the encoder goes through [`BitSource`], so the
//! same code path can be driven by a seeded generator during simulation and by
//! a scripted branch enumerator during exact evaluation.
//!
//! Seeded runs derive independent ChaCha8 streams from one master seed: the
//! stream number packs the purpose tag in the top 16 bits, the trial index in
//! the next 32 and the block index in the low 16.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of the encoder's random bits.
pub trait BitSource {
    /// A fair coin.
    fn uniform_bit(&mut self) -> u8;
    /// Returns 0 with probability `p0`.
    fn bernoulli_bit(&mut self, p0: f64) -> u8;
    /// Called by the encoder before it starts block `block` (0-based).
    fn begin_block(&mut self, _block: usize) {}
}

/// Adapter from any [`Rng`].
#[derive(Debug, Clone)]
pub struct RngBits<R>(pub R);

impl<R: Rng> BitSource for RngBits<R> {
    fn uniform_bit(&mut self) -> u8 {
        self.0.gen::<bool>() as u8
    }

    fn bernoulli_bit(&mut self, p0: f64) -> u8 {
        let u: f64 = self.0.gen();
        if u < p0 {
            0
        } else {
            1
        }
    }
}

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Messages = 1,
    Keys = 2,
    Encoder = 3,
    Channel = 4,
    Entropy = 5,
}

/// Deterministic sub-stream for `(purpose, trial, block)` under `master`.
pub fn substream(master: u64, purpose: Purpose, trial: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((purpose as u64) << 48) | ((trial & 0xffff_ffff) << 16) | (block & 0xffff));
    rng
}

/// Encoder randomness that switches to a fresh sub-stream at every block, so
/// any block can be reproduced in isolation.
#[derive(Debug, Clone)]
pub struct BlockStreams {
    master: u64,
    trial: u64,
    current: ChaCha8Rng,
}

impl BlockStreams {
    pub fn new(master: u64, trial: u64) -> Self {
        BlockStreams {
            master,
            trial,
            current: substream(master, Purpose::Encoder, trial, 0),
        }
    }
}

impl BitSource for BlockStreams {
    fn uniform_bit(&mut self) -> u8 {
        self.current.gen::<bool>() as u8
    }

    fn bernoulli_bit(&mut self, p0: f64) -> u8 {
        let u: f64 = self.current.gen();
        if u < p0 {
            0
        } else {
            1
        }
    }

    fn begin_block(&mut self, block: usize) {
        self.current = substream(self.master, Purpose::Encoder, self.trial, block as u64);
    }
}

/// `len` uniform bits from a generator.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen::<bool>() as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(substream(7, Purpose::Keys, 3, 1), |r, _| Some(r.gen())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(substream(7, Purpose::Keys, 3, 1), |r, _| Some(r.gen())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(substream(7, Purpose::Keys, 3, 2), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_bernoulli() {
        let mut src = RngBits(ChaCha8Rng::seed_from_u64(9));
        for _ in 0..100 {
            assert_eq!(src.bernoulli_bit(1.0), 0);
            assert_eq!(src.bernoulli_bit(0.0), 1);
        }
    }
}
