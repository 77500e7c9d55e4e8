//! Counter-based random streams.
//!
//! A draw is a pure function of `(seed, stream, counter)`. `(seed, stream)`
//! is hashed into a key once; the `j`-th 64-bit word of cell `counter` is
//! `mix64(key + (256 counter + j + 1) * GOLDEN)`, i.e. a SplitMix64 sequence
//! positioned at the cell. The words feed the ziggurat normal sampler from
//! `rand_distr`, which needs more than a handful of words per variate with
//! negligible probability. Paths are indexed by `stream`
//! and time steps by `counter`, so results do not depend on which thread
//! simulates which path or in which order.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key of one `(seed, stream)` pair; cells are addressed by a counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    #[inline]
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix64(seed ^ mix64(stream.wrapping_add(1).wrapping_mul(GOLDEN))),
        }
    }

    #[inline]
    pub fn cell(&self, counter: u64) -> CounterRng {
        CounterRng {
            state: self.key.wrapping_add((counter << 8).wrapping_mul(GOLDEN)),
        }
    }

    #[inline]
    pub fn normal(&self, counter: u64) -> f64 {
        StandardNormal.sample(&mut self.cell(counter))
    }

    pub fn normals(&self, counter: u64, out: &mut [f64]) {
        let mut rng = self.cell(counter);
        for z in out.iter_mut() {
            *z = StandardNormal.sample(&mut rng);
        }
    }
}

/// SplitMix64 generator positioned at one `(seed, stream, counter)` cell.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    #[inline]
    pub fn new(seed: u64, stream: u64, counter: u64) -> Self {
        Stream::new(seed, stream).cell(counter)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Standard normal variate for the given cell.
#[inline]
pub fn normal(seed: u64, stream: u64, counter: u64) -> f64 {
    Stream::new(seed, stream).normal(counter)
}

/// Fills `out` with independent standard normals for the given cell.
pub fn normals(seed: u64, stream: u64, counter: u64, out: &mut [f64]) {
    Stream::new(seed, stream).normals(counter, out)
}
