//! Built-in verification suites: closed forms against enumeration,
//! transition-probability signs, and the fitness-sharing / total-Hamming
//! argmax comparison.

use std::fmt;

use crate::analytics::{enumerate_success_probability, estimate_transition_probabilities, jump_to_opt_bound};
use crate::bitstring::BitString;
use crate::diversity::TieBreakRule;
use crate::error::{Error, Result};
use crate::fitness::JumpK;
use crate::pool::{Pool, Tracking};
use crate::variation::RandomSource;

use super::sweep::derive_mu;

pub const SUITES: [&str; 3] = ["oracles", "transitions", "equivalence"];

/// Largest relative error tolerated between closed form and enumeration.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}/{}: {}", self.suite, c.name, c.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Samples per target y in the transition suite.
    pub transition_samples: u64,
    /// Random pools in the equivalence suite.
    pub equivalence_pools: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            transition_samples: 1_000_000,
            equivalence_pools: 10_000,
        }
    }
}

pub fn verify(suite: &str, opts: &VerifyOptions) -> Result<VerifyReport> {
    match suite {
        "oracles" => oracles(),
        "transitions" => transitions(opts),
        "equivalence" => Ok(equivalence(opts)),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

/// Largest relative deviation of the closed form from exhaustive
/// enumeration over n <= 12, k <= 3, d <= k, chi in {1, 1.5, 2}.
pub fn oracle_grid_max_error() -> Result<(f64, usize)> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=12usize {
        for k in 1..=3usize.min(n - 1) {
            for d in 1..=k.min(n - k) {
                for chi in [1.0, 1.5, 2.0] {
                    let closed = jump_to_opt_bound(n, k, chi, d)?.exact;
                    let brute = enumerate_success_probability(n, k, chi, d)?;
                    worst = worst.max((closed - brute).abs() / brute);
                    cases += 1;
                }
            }
        }
    }
    Ok((worst, cases))
}

fn oracles() -> Result<VerifyReport> {
    let mut report = VerifyReport {
        suite: "oracles".into(),
        checks: Vec::new(),
    };
    let (worst, cases) = oracle_grid_max_error()?;
    report.push(
        "closed-form-vs-enumeration",
        worst <= ORACLE_TOLERANCE,
        format!("{cases} cases, max relative error {worst:e} (limit {ORACLE_TOLERANCE:e})"),
    );
    let mut bound_ok = true;
    for n in [10usize, 100, 1000] {
        for k in 1..=5 {
            for d in 1..=k {
                let s = jump_to_opt_bound(n, k, 1.0, d)?;
                bound_ok &= s.exact >= s.lower_bound;
            }
        }
    }
    report.push("sum-exceeds-lower-bound", bound_ok, "n in {10,100,1000}, k <= 5, d <= k");
    Ok(report)
}

fn transitions(opts: &VerifyOptions) -> Result<VerifyReport> {
    const Z: f64 = 1.96;
    let mut report = VerifyReport {
        suite: "transitions".into(),
        checks: Vec::new(),
    };
    let (n, k) = (100, 3);
    let mu = derive_mu(n);
    let ys = [(3 * mu).div_ceil(4), mu - 1, mu];
    for chi in [1.0, 2.0] {
        let engine = crate::engine::GaEngine::new(JumpK::new(n, k)?, mu, 1.0, chi, TieBreakRule::UniformRandom)?;
        let est = estimate_transition_probabilities(&engine, &ys, opts.transition_samples, opts.seed)?;
        for e in &est {
            let label = format!("chi={chi} y={}", e.y);
            let probs = format!("p+ = {:.3e} +- {:.1e}, p- = {:.3e} +- {:.1e}", e.p_plus, e.p_plus_half_width, e.p_minus, e.p_minus_half_width);
            if e.y == mu {
                report.push(format!("escape {label}"), e.p_minus > 0.0, probs);
            } else if chi == 2.0 {
                report.push(format!("negative-drift {label}"), e.decrease_dominates(Z), probs);
            } else {
                let c = e.conditional_increase();
                report.push(
                    format!("fair-walk {label}"),
                    c.is_some_and(|c| (0.4..=0.6).contains(&c)),
                    format!("P(up | change) = {}", c.map_or("undefined".into(), |c| format!("{c:.4}"))),
                );
            }
        }
    }
    Ok(report)
}

/// Outcome of comparing the fitness-sharing and total-Hamming argmax sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EquivalenceOutcome {
    pub pools: u64,
    pub mismatches: u64,
    /// Mismatches where the sharing set is a strict subset of the Hamming set.
    pub refinements: u64,
}

/// Random plateau pool: `mu` points with exactly n - k ones.
pub fn random_plateau_pool(n: usize, k: usize, mu: usize, rng: &mut RandomSource) -> Pool {
    let f = n as u64;
    let members = (0..mu)
        .map(|_| {
            let zeros: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
            (BitString::with_zeros_at(n, &zeros), f)
        })
        .collect();
    Pool::from_members(members, Tracking::all())
}

/// Draws `pools` plateau pools (n in 4..=12, k in 1..=min(4, n-1), mu in
/// 2..=6), sigma = 2k, and compares the argmax victim sets of both rules
/// with every member a candidate.
pub fn sharing_equivalence(pools: u64, seed: u64) -> EquivalenceOutcome {
    let mut rng = RandomSource::new(seed);
    let mut out = EquivalenceOutcome {
        pools,
        ..Default::default()
    };
    for _ in 0..pools {
        let n = 4 + rng.below(9);
        let k = 1 + rng.below(4.min(n - 1));
        let mu = 2 + rng.below(5);
        let pool = random_plateau_pool(n, k, mu, &mut rng);
        let all: Vec<usize> = (0..mu).collect();
        let sharing = TieBreakRule::FitnessSharing {
            sigma: 2.0 * k as f64,
            alpha: 1.0,
        }
        .preferred_victims(&pool, &all, None);
        let hamming = TieBreakRule::TotalHammingMax.preferred_victims(&pool, &all, None);
        if sharing != hamming {
            out.mismatches += 1;
            if sharing.iter().all(|v| hamming.contains(v)) {
                out.refinements += 1;
            }
        }
    }
    out
}

fn equivalence(opts: &VerifyOptions) -> VerifyReport {
    let o = sharing_equivalence(opts.equivalence_pools, opts.seed);
    let mut report = VerifyReport {
        suite: "equivalence".into(),
        checks: Vec::new(),
    };
    report.push(
        "sharing-argmax-equals-hamming-argmax",
        o.mismatches == 0,
        format!(
            "{} pools, {} mismatches ({} where sharing picks a strict subset of the Hamming ties)",
            o.pools, o.mismatches, o.refinements
        ),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_suite_passes() {
        let r = verify("oracles", &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(
            verify("nope", &VerifyOptions::default()),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn plateau_pools_are_on_the_plateau() {
        let mut rng = RandomSource::new(3);
        let pool = random_plateau_pool(10, 3, 5, &mut rng);
        assert!(pool.members().iter().all(|g| g.ones_count() == 7));
        for i in 0..5 {
            for j in 0..5 {
                assert!(pool.distance(i, j) <= 6);
            }
        }
    }

    #[test]
    fn equivalence_counts_are_consistent() {
        let o = sharing_equivalence(500, 2);
        assert_eq!(o.pools, 500);
        assert!(o.refinements <= o.mismatches);
        let report = verify(
            "equivalence",
            &VerifyOptions {
                equivalence_pools: 500,
                seed: 2,
                ..VerifyOptions::default()
            },
        )
        .unwrap();
        assert_eq!(report.passed(), o.mismatches == 0);
    }
}
