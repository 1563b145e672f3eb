//! Brute-force and simulation oracles for the crossover-then-mutation success
//! probability of two plateau parents.

use rayon::prelude::*;

use crate::bitstring::BitString;
use crate::error::{invalid, Result};
use crate::variation::{standard_bit_mutation, uniform_crossover, MutationRate, RandomSource};

/// Largest n the exhaustive oracle accepts (it visits 4^d * 2^n outcomes).
pub const MAX_ENUMERATION_BITS: usize = 20;

/// Two plateau points of Jump_k on n bits at Hamming distance exactly 2d.
///
/// The first has its unshared zeros at positions `0..d`, the second at
/// `d..2d`; both share zeros at `2d..k+d`.
pub fn plateau_pair(n: usize, k: usize, d: usize) -> Result<(BitString, BitString)> {
    if !(1 <= d && d <= k && k + d <= n) {
        return Err(invalid(format!("no plateau pair at distance 2d={} for n={n}, k={k}", 2 * d)));
    }
    let shared: Vec<usize> = (2 * d..k + d).collect();
    let mut zx: Vec<usize> = (0..d).collect();
    let mut zy: Vec<usize> = (d..2 * d).collect();
    zx.extend(&shared);
    zy.extend(&shared);
    Ok((BitString::with_zeros_at(n, &zx), BitString::with_zeros_at(n, &zy)))
}

/// Exact success probability by enumerating every crossover outcome on the
/// differing positions and every mutation flip mask over all n bits.
pub fn enumerate_success_probability(n: usize, k: usize, chi: f64, d: usize) -> Result<f64> {
    if n > MAX_ENUMERATION_BITS {
        return Err(invalid(format!("enumeration limited to n <= {MAX_ENUMERATION_BITS}")));
    }
    let (x, y) = plateau_pair(n, k, d)?;
    let p = chi / n as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("mutation rate chi/n must lie in (0, 1], got {p}")));
    }
    let xw = x.words()[0];
    let yw = y.words()[0];
    let differ: Vec<usize> = (0..n).filter(|&i| x.get(i) != y.get(i)).collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let crossover_p = 0.5f64.powi(differ.len() as i32);

    let mut total = 0.0;
    for choice in 0u64..(1 << differ.len()) {
        // Bit j of `choice` picks parent y at differing position j.
        let mut child = xw;
        for (j, &pos) in differ.iter().enumerate() {
            if choice >> j & 1 == 1 {
                child = (child & !(1 << pos)) | (yw & (1 << pos));
            }
        }
        for flips in 0..=all {
            if (child ^ flips) & all == all {
                let f = flips.count_ones() as i32;
                total += crossover_p * p.powi(f) * (1.0 - p).powi(n as i32 - f);
            }
        }
    }
    Ok(total)
}

/// Monte-Carlo frequency of the optimum over `trials` crossover+mutation
/// draws from the plateau pair at distance 2d. Returns the hit count.
pub fn simulate_pair_success(n: usize, k: usize, chi: f64, d: usize, trials: u64, seed: u64) -> Result<u64> {
    let (x, y) = plateau_pair(n, k, d)?;
    let rate = MutationRate::new(chi, n)?;
    const CHUNKS: u64 = 64;
    let root = RandomSource::new(seed);
    let hits = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = root.split(c);
            let share = trials / CHUNKS + u64::from(c < trials % CHUNKS);
            (0..share)
                .filter(|_| {
                    let child = uniform_crossover(&x, &y, &mut rng).expect("equal lengths");
                    standard_bit_mutation(&child, &rate, &mut rng)
                        .expect("matching rate")
                        .is_all_ones()
                })
                .count() as u64
        })
        .sum();
    Ok(hits)
}
