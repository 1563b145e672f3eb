//! Tie-breaking rules deciding which lowest-fitness pool member is removed.
//!
//! Every rule first narrows the candidate set to its preferred victims (an
//! argmax set of some diversity objective) and then picks uniformly among
//! them. `preferred_victims` exposes the deterministic part so that exact
//! oracles can treat a rule as a distribution over victims.

use std::fmt;

use crate::engine::OffspringContext;
use crate::error::{invalid, Error, Result};
use crate::pool::{Pool, Tracking};
use crate::variation::RandomSource;

/// Relative tolerance under which two fitness-sharing objective values count
/// as tied. The objective is a sum of reciprocals, so mathematically equal
/// values can differ in the last bits depending on summation order.
pub const SHARING_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TieBreakRule {
    UniformRandom,
    DuplicateElimination,
    DuplicateMinimization,
    DeterministicCrowding,
    ConvexHullMax,
    TotalHammingMax,
    FitnessSharing { sigma: f64, alpha: f64 },
}

/// Identifiers accepted in configs and on the command line.
pub const RULE_IDS: [&str; 7] = [
    "uniform",
    "dup-elim",
    "dup-min",
    "det-crowding",
    "convex-hull",
    "total-hamming",
    "fitness-sharing",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalDecision {
    pub victim: usize,
    pub candidates: Vec<usize>,
}

impl TieBreakRule {
    pub fn fitness_sharing(sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("fitness sharing needs sigma > 0, got {sigma}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("fitness sharing needs alpha > 0, got {alpha}")));
        }
        Ok(TieBreakRule::FitnessSharing { sigma, alpha })
    }

    /// Parses a rule identifier. `sigma`/`alpha` only matter for
    /// fitness sharing.
    pub fn from_id(id: &str, sigma: f64, alpha: f64) -> Result<Self> {
        Ok(match id {
            "uniform" => TieBreakRule::UniformRandom,
            "dup-elim" => TieBreakRule::DuplicateElimination,
            "dup-min" => TieBreakRule::DuplicateMinimization,
            "det-crowding" => TieBreakRule::DeterministicCrowding,
            "convex-hull" => TieBreakRule::ConvexHullMax,
            "total-hamming" => TieBreakRule::TotalHammingMax,
            "fitness-sharing" => TieBreakRule::fitness_sharing(sigma, alpha)?,
            other => return Err(Error::UnknownMechanism(other.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            TieBreakRule::UniformRandom => "uniform",
            TieBreakRule::DuplicateElimination => "dup-elim",
            TieBreakRule::DuplicateMinimization => "dup-min",
            TieBreakRule::DeterministicCrowding => "det-crowding",
            TieBreakRule::ConvexHullMax => "convex-hull",
            TieBreakRule::TotalHammingMax => "total-hamming",
            TieBreakRule::FitnessSharing { .. } => "fitness-sharing",
        }
    }

    /// Pool statistics the rule reads.
    pub fn tracking(&self) -> Tracking {
        match self {
            TieBreakRule::ConvexHullMax => Tracking {
                distances: false,
                position_counts: true,
            },
            TieBreakRule::TotalHammingMax | TieBreakRule::FitnessSharing { .. } => Tracking {
                distances: true,
                position_counts: false,
            },
            _ => Tracking::default(),
        }
    }

    /// The subset of `candidates` the rule may remove; the victim is drawn
    /// uniformly from it. Never empty when `candidates` is not.
    pub fn preferred_victims(&self, pool: &Pool, candidates: &[usize], ctx: Option<&OffspringContext>) -> Vec<usize> {
        if candidates.len() <= 1 {
            return candidates.to_vec();
        }
        match *self {
            TieBreakRule::UniformRandom => candidates.to_vec(),
            TieBreakRule::DuplicateElimination => {
                let dup: Vec<usize> = candidates
                    .iter()
                    .copied()
                    .filter(|&c| pool.multiplicity(pool.genotype(c)) >= 2)
                    .collect();
                if dup.is_empty() {
                    candidates.to_vec()
                } else {
                    dup
                }
            }
            TieBreakRule::DuplicateMinimization => {
                argmax_by_key(candidates, |c| pool.multiplicity(pool.genotype(c)) as u64)
            }
            TieBreakRule::DeterministicCrowding => crowding_victims(candidates, ctx),
            TieBreakRule::ConvexHullMax => argmax_by_key(candidates, |c| pool.mixed_positions_without(c) as u64),
            // g(P \ {z}) = g(P) - 2 * sum_y d(z, y): maximizing it means
            // minimizing z's distance sum.
            TieBreakRule::TotalHammingMax => argmax_by_key(candidates, |c| u64::MAX - pool.distance_sum(c)),
            TieBreakRule::FitnessSharing { sigma, alpha } => sharing_victims(pool, candidates, sigma, alpha),
        }
    }

    pub fn decide(
        &self,
        pool: &Pool,
        candidates: &[usize],
        ctx: Option<&OffspringContext>,
        rng: &mut RandomSource,
    ) -> RemovalDecision {
        assert!(!candidates.is_empty(), "tie-breaking needs at least one candidate");
        let preferred = self.preferred_victims(pool, candidates, ctx);
        let victim = if preferred.len() == 1 {
            preferred[0]
        } else {
            *rng.choose(&preferred)
        };
        debug_assert!(candidates.contains(&victim));
        RemovalDecision {
            victim,
            candidates: candidates.to_vec(),
        }
    }
}

impl fmt::Display for TieBreakRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreakRule::FitnessSharing { sigma, alpha } => write!(f, "fitness-sharing(sigma={sigma}, alpha={alpha})"),
            other => f.write_str(other.id()),
        }
    }
}

fn argmax_by_key(candidates: &[usize], key: impl Fn(usize) -> u64) -> Vec<usize> {
    let keys: Vec<u64> = candidates.iter().map(|&c| key(c)).collect();
    let best = keys.iter().copied().max().expect("non-empty candidates");
    candidates
        .iter()
        .zip(&keys)
        .filter(|&(_, &k)| k == best)
        .map(|(&c, _)| c)
        .collect()
}

fn crowding_victims(candidates: &[usize], ctx: Option<&OffspringContext>) -> Vec<usize> {
    let Some(ctx) = ctx else {
        return candidates.to_vec();
    };
    let mut parents: Vec<usize> = ctx
        .parent_indices()
        .iter()
        .copied()
        .filter(|p| candidates.contains(p))
        .collect();
    parents.dedup();
    if parents.is_empty() {
        candidates.to_vec()
    } else {
        parents
    }
}

/// Similarity weight `max(0, 1 - (d/sigma)^alpha)` for every distance 0..=n.
pub fn sharing_weights(n: usize, sigma: f64, alpha: f64) -> Vec<f64> {
    (0..=n)
        .map(|d| (1.0 - (d as f64 / sigma).powf(alpha)).max(0.0))
        .collect()
}

/// Shared-fitness sum over the pool without member `z`, for every candidate.
///
/// Denominators include the self term (weight 1), so they are at least 1.
pub fn sharing_objectives(pool: &Pool, candidates: &[usize], sigma: f64, alpha: f64) -> Vec<f64> {
    let len = pool.len();
    let weights = sharing_weights(pool.bit_len(), sigma, alpha);
    let w = |i: usize, j: usize| weights[pool.distance(i, j) as usize];
    let niche: Vec<f64> = (0..len).map(|x| (0..len).map(|y| w(x, y)).sum()).collect();
    candidates
        .iter()
        .map(|&z| {
            (0..len)
                .filter(|&x| x != z)
                .map(|x| pool.fitness()[x] as f64 / (niche[x] - w(x, z)))
                .sum()
        })
        .collect()
}

fn sharing_victims(pool: &Pool, candidates: &[usize], sigma: f64, alpha: f64) -> Vec<usize> {
    let values = sharing_objectives(pool, candidates, sigma, alpha);
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = SHARING_TIE_TOLERANCE * best.abs().max(1.0);
    candidates
        .iter()
        .zip(&values)
        .filter(|&(_, &v)| v >= best - tol)
        .map(|(&c, _)| c)
        .collect()
}

pub fn break_ties_uniform(pool: &Pool, candidates: &[usize], rng: &mut RandomSource) -> RemovalDecision {
    TieBreakRule::UniformRandom.decide(pool, candidates, None, rng)
}

pub fn break_ties_duplicate_elimination(pool: &Pool, candidates: &[usize], rng: &mut RandomSource) -> RemovalDecision {
    TieBreakRule::DuplicateElimination.decide(pool, candidates, None, rng)
}

pub fn break_ties_duplicate_minimization(pool: &Pool, candidates: &[usize], rng: &mut RandomSource) -> RemovalDecision {
    TieBreakRule::DuplicateMinimization.decide(pool, candidates, None, rng)
}

pub fn break_ties_deterministic_crowding(
    pool: &Pool,
    candidates: &[usize],
    ctx: &OffspringContext,
    rng: &mut RandomSource,
) -> RemovalDecision {
    TieBreakRule::DeterministicCrowding.decide(pool, candidates, Some(ctx), rng)
}

pub fn break_ties_convex_hull(pool: &Pool, candidates: &[usize], rng: &mut RandomSource) -> RemovalDecision {
    TieBreakRule::ConvexHullMax.decide(pool, candidates, None, rng)
}

pub fn break_ties_total_hamming(pool: &Pool, candidates: &[usize], rng: &mut RandomSource) -> RemovalDecision {
    TieBreakRule::TotalHammingMax.decide(pool, candidates, None, rng)
}

pub fn break_ties_fitness_sharing(
    pool: &Pool,
    candidates: &[usize],
    sigma: f64,
    alpha: f64,
    rng: &mut RandomSource,
) -> Result<RemovalDecision> {
    Ok(TieBreakRule::fitness_sharing(sigma, alpha)?.decide(pool, candidates, None, rng))
}
