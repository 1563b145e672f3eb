//! Seedable randomness, uniform crossover and standard bit mutation.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::bitstring::BitString;
use crate::error::{invalid, Error, Result};

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `replication` at grid point `grid_index` of a sweep.
///
/// `mix64(mix64(mix64(master) ^ grid_index) ^ replication)`. Stable across
/// releases; changing it changes every published CSV.
pub fn derive_seed(master: u64, grid_index: u64, replication: u64) -> u64 {
    mix64(mix64(mix64(master) ^ grid_index) ^ replication)
}

/// Per-run random stream: ChaCha8 keyed by a 64-bit seed.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream, e.g. one per island or per worker.
    pub fn split(&self, stream: u64) -> Self {
        RandomSource::new(mix64(self.seed ^ mix64(stream.wrapping_add(1))))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform index in `0..len`. Sampled through `u64` so results do not
    /// depend on the platform's pointer width.
    #[inline]
    pub fn below(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        self.rng.random_range(0..len as u64) as usize
    }

    /// Uniform real in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn coin(&mut self) -> bool {
        self.rng.next_u64() >> 63 == 1
    }

    /// Uniform bit string of length `n`.
    pub fn bit_string(&mut self, n: usize) -> BitString {
        let words = (0..n.div_ceil(64)).map(|_| self.rng.next_u64()).collect();
        BitString::from_words(words, n)
    }

    /// Uniform element of `items`.
    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Per-bit mutation probability `chi / n`.
#[derive(Clone, Debug)]
pub struct MutationRate {
    chi: f64,
    n: usize,
    flips: Binomial,
}

impl MutationRate {
    pub fn new(chi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("mutation rate needs n >= 1"));
        }
        if !(chi > 0.0 && chi <= n as f64) {
            return Err(invalid(format!("mutation intensity chi must lie in (0, n], got {chi}")));
        }
        let flips = Binomial::new(n as u64, chi / n as f64)
            .map_err(|e| invalid(format!("binomial flip distribution: {e}")))?;
        Ok(MutationRate { chi, n, flips })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn per_bit(&self) -> f64 {
        self.chi / self.n as f64
    }
}

/// Each offspring bit copies `x_i` or `y_i` with probability 1/2 each.
pub fn uniform_crossover(x: &BitString, y: &BitString, rng: &mut RandomSource) -> Result<BitString> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(crossover_unchecked(x, y, rng))
}

#[inline]
pub(crate) fn crossover_unchecked(x: &BitString, y: &BitString, rng: &mut RandomSource) -> BitString {
    let words = x
        .words()
        .iter()
        .zip(y.words())
        .map(|(&a, &b)| {
            // Where a == b the mask is irrelevant.
            let m = rng.next_u64();
            (a & m) | (b & !m)
        })
        .collect();
    BitString::from_words(words, x.len())
}

/// Flips each bit independently with probability `chi / n`.
///
/// Draws the flip count from Binomial(n, chi/n) and then that many distinct
/// positions uniformly, which has the same distribution as n coin flips.
pub fn standard_bit_mutation(x: &BitString, rate: &MutationRate, rng: &mut RandomSource) -> Result<BitString> {
    if rate.n != x.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: rate.n,
        });
    }
    let mut y = x.clone();
    mutate_in_place(&mut y, rate, rng);
    Ok(y)
}

#[inline]
pub(crate) fn mutate_in_place(x: &mut BitString, rate: &MutationRate, rng: &mut RandomSource) {
    let n = rate.n;
    let flips = rate.flips.sample(rng) as usize;
    match flips {
        0 => {}
        1 => x.flip(rng.below(n)),
        f if f == n => *x = x.complement(),
        f => {
            for i in index::sample(rng, n, f) {
                x.flip(i);
            }
        }
    }
}
