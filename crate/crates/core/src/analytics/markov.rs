//! Exact expected runtime of the (2+1) GA on tiny instances, by solving the
//! absorbing Markov chain over unordered population pairs.
//!
//! The chain is built straight from the algorithm's definition (offspring
//! distribution by enumerating parent choice, crossover mask and mutation
//! flip mask; removal of a uniformly chosen member among the rule's preferred
//! lowest-fitness set of the 3-member pool) and shares no code with the
//! simulator's step loop.

use std::collections::HashMap;

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::bitstring::BitString;
use crate::diversity::TieBreakRule;
use crate::engine::{GaConfig, Mechanism, OffspringContext};
use crate::error::{invalid, Result};
use crate::fitness::{JumpK, Objective};
use crate::pool::{Pool, Tracking};
use crate::variation::{derive_seed, RandomSource};

/// Largest transient state count solved exactly (n = 6 gives 2016).
pub const MAX_EXACT_STATES: usize = 2100;

/// Replications of the Monte-Carlo fallback.
pub const MONTE_CARLO_RUNS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectedRuntime {
    Exact { value: f64, states: usize },
    MonteCarlo { mean: f64, half_width: f64, runs: u64 },
}

impl ExpectedRuntime {
    pub fn value(&self) -> f64 {
        match *self {
            ExpectedRuntime::Exact { value, .. } => value,
            ExpectedRuntime::MonteCarlo { mean, .. } => mean,
        }
    }
}

/// Solved chain: expected remaining generations from every pair state.
#[derive(Debug, Clone)]
pub struct AbsorbingChain {
    n: usize,
    mu: usize,
    index: HashMap<(u64, u64), usize>,
    generations: Vec<f64>,
    optimum: u64,
}

impl AbsorbingChain {
    pub fn transient_states(&self) -> usize {
        self.generations.len()
    }

    /// Expected further evaluations until the optimum is created, starting
    /// from population {a, b}. Zero if the optimum is already present.
    pub fn expected_generations(&self, a: &BitString, b: &BitString) -> Result<f64> {
        if a.len() != self.n || b.len() != self.n {
            return Err(invalid("genotype length does not match the chain"));
        }
        let (a, b) = (a.words()[0], b.words()[0]);
        if a == self.optimum || b == self.optimum {
            return Ok(0.0);
        }
        Ok(self.generations[self.index[&key(a, b)]])
    }

    /// Expected evaluations from a uniformly random population, the mu
    /// initial evaluations included.
    pub fn expected_evaluations(&self) -> f64 {
        let size = 1u64 << self.n;
        let all = size as f64 * size as f64;
        let mut total = 0.0;
        for (&(a, b), &i) in &self.index {
            let weight = if a == b { 1.0 } else { 2.0 };
            total += weight / all * self.generations[i];
        }
        self.mu as f64 + total
    }
}

fn key(a: u64, b: u64) -> (u64, u64) {
    (a.min(b), a.max(b))
}

/// Builds and solves the chain for a mu = 2 configuration with at most
/// [`MAX_EXACT_STATES`] transient states.
pub fn solve_chain(config: &GaConfig) -> Result<AbsorbingChain> {
    config.validate()?;
    let rule = match config.mechanism {
        Mechanism::TieBreak(rule) => rule,
        Mechanism::Island { .. } => return Err(invalid("the exact chain models the (mu+1) GA only")),
    };
    if config.mu != 2 {
        return Err(invalid(format!("exact chain needs mu = 2, got {}", config.mu)));
    }
    let n = config.n;
    let size = 1usize << n.min(32);
    let transient = (size - 1) * size / 2;
    if n > 20 || transient > MAX_EXACT_STATES {
        return Err(invalid(format!("{transient} transient states exceed the exact limit {MAX_EXACT_STATES}")));
    }
    let f = config.jump()?;
    let optimum = (1u64 << n) - 1;

    let mut index = HashMap::new();
    let mut states = Vec::with_capacity(transient);
    for a in 0..optimum {
        for b in a..optimum {
            index.insert((a, b), states.len());
            states.push((a, b));
        }
    }

    let p = config.chi / n as f64;
    let flip_prob: Vec<f64> = (0..=n).map(|d| p.powi(d as i32) * (1.0 - p).powi((n - d) as i32)).collect();
    let fit = |x: u64| f.value_of_ones(x.count_ones() as usize);

    let m = states.len();
    let mut system = DMatrix::<f64>::identity(m, m);
    for (row, &(a, b)) in states.iter().enumerate() {
        let parents = [a, b];
        // (probability, offspring context parents, crossover used)
        let mut contexts: Vec<(f64, [usize; 2], bool)> = Vec::new();
        if config.p_c > 0.0 {
            for i in 0..2 {
                for j in 0..2 {
                    contexts.push((config.p_c / 4.0, [i, j], true));
                }
            }
        }
        if config.p_c < 1.0 {
            for i in 0..2 {
                contexts.push(((1.0 - config.p_c) / 2.0, [i, i], false));
            }
        }
        for (ctx_prob, [i, j], crossover) in contexts {
            let child_dist = offspring_distribution(n, parents[i], parents[j], crossover, &flip_prob);
            for (child, &pc) in child_dist.iter().enumerate() {
                if pc == 0.0 {
                    continue;
                }
                let child = child as u64;
                if child == optimum {
                    continue;
                }
                let ctx = if crossover {
                    OffspringContext::crossover(word(child, n), i, j)
                } else {
                    OffspringContext::mutation(word(child, n), i)
                };
                for (next, q) in successors(&f, rule, n, a, b, child, &ctx, fit) {
                    let col = index[&key(next.0, next.1)];
                    system[(row, col)] -= ctx_prob * pc * q;
                }
            }
        }
    }

    let ones = DVector::<f64>::from_element(m, 1.0);
    let solution = system
        .lu()
        .solve(&ones)
        .ok_or_else(|| invalid("absorbing chain system is singular"))?;
    Ok(AbsorbingChain {
        n,
        mu: config.mu,
        index,
        generations: solution.iter().copied().collect(),
        optimum,
    })
}

fn word(x: u64, n: usize) -> BitString {
    BitString::from_words(vec![x], n)
}

/// Distribution of the offspring over all 2^n strings.
fn offspring_distribution(n: usize, x: u64, y: u64, crossover: bool, flip_prob: &[f64]) -> Vec<f64> {
    let size = 1usize << n;
    let mut base = vec![0.0; size];
    if crossover {
        let differ: Vec<usize> = (0..n).filter(|&i| (x ^ y) >> i & 1 == 1).collect();
        let share = 0.5f64.powi(differ.len() as i32);
        for mask in 0u64..(1 << differ.len()) {
            let mut c = x;
            for (t, &pos) in differ.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    c ^= 1 << pos;
                }
            }
            base[c as usize] += share;
        }
    } else {
        base[x as usize] = 1.0;
    }
    let mut out = vec![0.0; size];
    for (c, &pc) in base.iter().enumerate() {
        if pc == 0.0 {
            continue;
        }
        for (z, slot) in out.iter_mut().enumerate() {
            *slot += pc * flip_prob[(c ^ z).count_ones() as usize];
        }
    }
    out
}

/// Next population states after offspring `child` joins {a, b}.
#[allow(clippy::too_many_arguments)]
fn successors(
    f: &JumpK,
    rule: TieBreakRule,
    n: usize,
    a: u64,
    b: u64,
    child: u64,
    ctx: &OffspringContext,
    fit: impl Fn(u64) -> u64,
) -> Vec<((u64, u64), f64)> {
    let pool3 = [a, b, child];
    let worst = pool3.iter().map(|&x| fit(x)).min().unwrap_or(0);
    let candidates: Vec<usize> = (0..3).filter(|&i| fit(pool3[i]) == worst).collect();
    let victims = if candidates.len() == 1 {
        candidates
    } else {
        let pool = Pool::from_members(
            pool3.iter().map(|&x| (word(x, n), fit(x))).collect(),
            Tracking::all(),
        );
        rule.preferred_victims(&pool, &candidates, Some(ctx))
    };
    debug_assert!(f.n() == n);
    let q = 1.0 / victims.len() as f64;
    victims
        .into_iter()
        .map(|v| {
            let rest: Vec<u64> = (0..3).filter(|&i| i != v).map(|i| pool3[i]).collect();
            (key(rest[0], rest[1]), q)
        })
        .collect()
}

/// Monte-Carlo mean of the simulator's evaluation count with a 95%
/// normal-approximation half-width. Runs that hit the budget contribute
/// their (censored) evaluation count.
pub fn monte_carlo_expected_runtime(config: &GaConfig, runs: u64) -> Result<ExpectedRuntime> {
    if runs < 2 {
        return Err(invalid("need at least two runs"));
    }
    let engine = config.engine()?;
    use rayon::prelude::*;
    let samples: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomSource::new(derive_seed(config.seed, 0, r));
            engine
                .run(config.max_evaluations, crate::engine::Trajectory::Off, &mut rng)
                .evaluations as f64
        })
        .collect();
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(ExpectedRuntime::MonteCarlo {
        mean,
        half_width: super::transitions::Z_95 * (var / count).sqrt(),
        runs,
    })
}

/// Exact expectation from a random start; errors if the chain is too big.
pub fn exact_expected_runtime(config: &GaConfig) -> Result<ExpectedRuntime> {
    let chain = solve_chain(config)?;
    Ok(ExpectedRuntime::Exact {
        value: chain.expected_evaluations(),
        states: chain.transient_states(),
    })
}

/// Exact expectation when the chain is small enough, otherwise a
/// Monte-Carlo estimate over [`MONTE_CARLO_RUNS`] runs.
pub fn brute_force_expected_runtime(config: &GaConfig) -> Result<ExpectedRuntime> {
    config.validate()?;
    if config.mu == 2 && config.n <= 10 && matches!(config.mechanism, Mechanism::TieBreak(_)) {
        match exact_expected_runtime(config) {
            Ok(r) => return Ok(r),
            Err(e) => warn!("exact chain unavailable ({e}); falling back to Monte-Carlo"),
        }
    } else {
        warn!("configuration outside the exact chain's range; falling back to Monte-Carlo");
    }
    monte_carlo_expected_runtime(config, MONTE_CARLO_RUNS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, k: usize, p_c: f64) -> GaConfig {
        let mut c = GaConfig::new(n, k, 2);
        c.p_c = p_c;
        c
    }

    #[test]
    fn rows_of_transition_matrix_are_stochastic() {
        let f = JumpK::new(4, 1).unwrap();
        let fp: Vec<f64> = (0..=4).map(|d| 0.25f64.powi(d) * 0.75f64.powi(4 - d)).collect();
        for (x, y) in [(0u64, 3u64), (5, 10), (7, 7)] {
            for cross in [false, true] {
                let dist = offspring_distribution(4, x, y, cross, &fp);
                assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for (c, _) in dist.iter().enumerate() {
                    let ctx = OffspringContext::crossover(word(c as u64, 4), 0, 1);
                    let s = successors(&f, TieBreakRule::UniformRandom, 4, x, y, c as u64, &ctx, |z| {
                        f.value_of_ones(z.count_ones() as usize)
                    });
                    assert!((s.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn optimum_seeded_start_needs_nothing() {
        let chain = solve_chain(&config(4, 1, 0.0)).unwrap();
        let one = BitString::ones(4);
        let z = BitString::zeros(4);
        assert_eq!(chain.expected_generations(&one, &z).unwrap(), 0.0);
        assert!(chain.expected_generations(&z, &z).unwrap() > 0.0);
    }

    #[test]
    fn onemax_like_instance_has_sane_value() {
        // Jump_1 is OneMax shifted; from one missing bit with both members
        // equal, the (1+1)-style wait is about e*n/1 generations.
        let chain = solve_chain(&config(4, 1, 0.0)).unwrap();
        let near: BitString = "1110".parse().unwrap();
        let t = chain.expected_generations(&near, &near).unwrap();
        let p = 0.25 * 0.75f64.powi(3);
        assert!(t > 0.0 && t <= 1.0 / p + 1e-9, "t = {t}");
    }

    #[test]
    fn crossover_helps_on_small_jump() {
        let with = exact_expected_runtime(&config(6, 2, 1.0)).unwrap().value();
        let without = exact_expected_runtime(&config(6, 2, 0.0)).unwrap().value();
        assert!(with < without, "p_c=1: {with}, p_c=0: {without}");
    }

    #[test]
    fn too_large_falls_back() {
        let mut c = config(8, 2, 1.0);
        c.max_evaluations = 1_000_000;
        assert!(exact_expected_runtime(&c).is_err());
        let mut small = config(4, 1, 0.0);
        small.mu = 3;
        assert!(solve_chain(&small).is_err());
    }
}
