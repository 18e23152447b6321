//! Seeded random number generation for the simulation harness.
//!
//! ChaCha12 with one stream per replication: replication `r` of a design
//! seeded with `s` always sees the same draws, no matter how replications
//! are scheduled across threads. The uniform-double extraction is pinned
//! here (53-bit mantissa method) so results do not depend on a
//! distribution crate's implementation details.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic generator tied to a (seed, stream) pair.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha12Rng,
}

impl SimRng {
    /// Generator for auxiliary draws (calibration, shared covariate pools).
    pub fn new(seed: u64) -> Self {
        SimRng { inner: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Substream for one replication; streams are independent by construction.
    pub fn for_replication(seed: u64, replication: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        // stream 0 is reserved for SimRng::new
        inner.set_stream(replication.wrapping_add(1));
        SimRng { inner }
    }

    /// Uniform draw in [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [a, b).
    #[inline]
    pub fn uniform_in(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    /// Uniform draw in (0, 1], safe to pass through ln().
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// -1.0 or +1.0 with equal probability.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.uniform() < 0.5 {
            -1.0
        } else {
            1.0
        }
    }
}
