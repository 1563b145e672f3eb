//! Empirical transition probabilities of the largest-species size Y(t) on
//! the plateau.
//!
//! Each sample prepares a plateau population with Y = y from scratch, runs a
//! single generation and records whether Y went up, down, or stayed. Samples
//! are independent, so no autocorrelation correction is needed.

use rayon::prelude::*;

use crate::bitstring::BitString;
use crate::engine::{GaEngine, Population};
use crate::error::{invalid, Result};
use crate::fitness::JumpK;
use crate::variation::{derive_seed, RandomSource};

/// Two-sided 95% normal quantile used for every half-width.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEstimate {
    pub y: usize,
    pub samples: u64,
    pub increases: u64,
    pub decreases: u64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_plus_half_width: f64,
    pub p_minus_half_width: f64,
}

impl TransitionEstimate {
    fn from_counts(y: usize, samples: u64, increases: u64, decreases: u64) -> Self {
        let n = samples as f64;
        let p_plus = increases as f64 / n;
        let p_minus = decreases as f64 / n;
        let hw = |p: f64| Z_95 * (p * (1.0 - p) / n).sqrt();
        TransitionEstimate {
            y,
            samples,
            increases,
            decreases,
            p_plus,
            p_minus,
            p_plus_half_width: hw(p_plus),
            p_minus_half_width: hw(p_minus),
        }
    }

    /// P(increase | Y changed); `None` if Y never changed.
    pub fn conditional_increase(&self) -> Option<f64> {
        let changes = self.increases + self.decreases;
        (changes > 0).then(|| self.increases as f64 / changes as f64)
    }

    /// Half-width of the conditional increase estimate.
    pub fn conditional_half_width(&self) -> Option<f64> {
        let changes = (self.increases + self.decreases) as f64;
        self.conditional_increase()
            .map(|c| Z_95 * (c * (1.0 - c) / changes).sqrt())
    }

    /// Standard error of `p_minus - p_plus` (multinomial covariance included).
    pub fn difference_std_error(&self) -> f64 {
        let diff = self.p_minus - self.p_plus;
        ((self.p_minus + self.p_plus - diff * diff) / self.samples as f64).sqrt()
    }

    /// Whether `p_minus > p_plus` at one-sided confidence `z`.
    pub fn decrease_dominates(&self, z: f64) -> bool {
        self.p_minus - self.p_plus > z * self.difference_std_error()
    }
}

/// Plateau population of size mu whose largest species has exactly `y`
/// members: one species of size y plus mu - y distinct points, each at
/// distance 2 from the majority and from one another.
pub fn prepare_plateau_population(engine: &GaEngine<JumpK>, y: usize) -> Result<Population> {
    let f = *engine.objective();
    let (n, k, mu) = (crate::fitness::Objective::n(&f), f.k(), engine.mu());
    if y == 0 || y > mu {
        return Err(invalid(format!("target size y={y} outside 1..={mu}")));
    }
    let others = mu - y;
    if others > n - k {
        return Err(invalid(format!("cannot place {others} distinct plateau points around the majority")));
    }
    if others > 0 && y < 2 && others > 1 {
        return Err(invalid("largest species must be unique"));
    }
    // Majority: zeros on the last k positions. Minority j: first majority
    // zero turned to one, one-bit j turned to zero.
    let zeros: Vec<usize> = (n - k..n).collect();
    let majority = BitString::with_zeros_at(n, &zeros);
    let mut genotypes = vec![majority.clone(); y];
    for j in 0..others {
        let mut g = majority.clone();
        g.set(n - k, true);
        g.set(j, false);
        genotypes.push(g);
    }
    engine.population_from(genotypes)
}

/// Estimates p+(y) and p-(y) for each target y from `samples` independent
/// single-generation trials per y.
pub fn estimate_transition_probabilities(
    engine: &GaEngine<JumpK>,
    y_targets: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Vec<TransitionEstimate>> {
    const CHUNKS: u64 = 64;
    y_targets
        .iter()
        .enumerate()
        .map(|(yi, &y)| {
            let prepared = prepare_plateau_population(engine, y)?;
            let y0 = prepared.largest_species();
            debug_assert_eq!(y0, y);
            let (up, down) = (0..CHUNKS)
                .into_par_iter()
                .map(|c| {
                    let mut rng = RandomSource::new(derive_seed(seed, yi as u64, c));
                    let share = samples / CHUNKS + u64::from(c < samples % CHUNKS);
                    let (mut up, mut down) = (0u64, 0u64);
                    for _ in 0..share {
                        let mut pop = prepared.clone();
                        engine.step(&mut pop, &mut rng);
                        match pop.largest_species() as i64 - y0 as i64 {
                            1 => up += 1,
                            -1 => down += 1,
                            _ => {}
                        }
                    }
                    (up, down)
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            Ok(TransitionEstimate::from_counts(y, samples, up, down))
        })
        .collect()
}
