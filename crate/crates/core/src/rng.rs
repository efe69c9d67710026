//! The single random stream every trial draws from.

use rand_mt::Mt;

/// Mersenne-Twister (MT19937) stream with the two real-valued views the
/// simulation uses.
#[derive(Clone)]
pub struct Rng {
    mt: Mt,
    seed: u32,
}

impl Rng {
    pub fn new(seed: u32) -> Self {
        Self {
            mt: Mt::new(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u32 {
        self.seed
    }

    /// Raw 32-bit output of the generator.
    pub fn next_u32(&mut self) -> u32 {
        self.mt.next_u32()
    }

    /// Uniform real in `[0, 1)`; one generator word per call.
    pub fn random(&mut self) -> f64 {
        Self::unit(self.next_u32())
    }

    /// Uniform real in `[-1, 1)`.
    pub fn crandom(&mut self) -> f64 {
        Self::centered(self.random())
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.random() * n as f64) as usize).min(n - 1)
    }

    /// Maps a generator word onto `[0, 1)` (genrand_real2).
    pub fn unit(word: u32) -> f64 {
        f64::from(word) * (1.0 / 4_294_967_296.0)
    }

    pub fn centered(unit: f64) -> f64 {
        2.0 * unit - 1.0
    }
}

impl std::fmt::Debug for Rng {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rng").field("seed", &self.seed).finish_non_exhaustive()
    }
}
