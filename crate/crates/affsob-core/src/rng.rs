//! Counter-based pseudo-random numbers.
//!
//! Sampling is a pure function of `(seed, stream, index)`: there is no
//! mutable generator state, so a parallel integrator can draw node `i` from
//! any thread and always obtain the same value. The mixing function is the
//! SplitMix64 finalizer, which passes the usual statistical batteries and is
//! more than adequate for Monte Carlo integration (this is explicitly not a
//! cryptographic generator).

/// Stateless generator keyed by a seed and a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl CounterRng {
    /// Creates a generator for `(seed, stream)`. Distinct streams with the
    /// same seed produce statistically independent sequences, which lets one
    /// run dedicate a stream to each integral.
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix(seed ^ mix(stream.wrapping_mul(GOLDEN).wrapping_add(GOLDEN)));
        CounterRng { key }
    }

    /// The `i`-th raw 64-bit word of the stream.
    #[inline]
    pub fn u64_at(&self, i: u64) -> u64 {
        mix(self.key ^ i.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))
    }

    /// The `i`-th uniform deviate in `[0, 1)`, with full 53-bit mantissa.
    #[inline]
    pub fn f64_at(&self, i: u64) -> f64 {
        (self.u64_at(i) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// The `i`-th uniform deviate in the open interval `(0, 1)`; useful when
    /// a change of variables is singular at the endpoints.
    #[inline]
    pub fn f64_open_at(&self, i: u64) -> f64 {
        ((self.u64_at(i) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform deviate in `[lo, hi)`.
    #[inline]
    pub fn range_at(&self, i: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64_at(i)
    }

    /// A standard normal pair, Box-Muller from indices `2i` and `2i + 1`.
    pub fn normal_pair_at(&self, i: u64) -> (f64, f64) {
        let u1 = self.f64_open_at(2 * i);
        let u2 = self.f64_at(2 * i + 1);
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * u2);
        (r * c, r * s)
    }
}
