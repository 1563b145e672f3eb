//! The steady-state (mu+1) GA.
//!
//! Each generation creates one offspring (uniform crossover of two parents
//! drawn with replacement, with probability `p_c`, followed by standard bit
//! mutation; otherwise mutation of a single parent), adds it to the
//! population and removes one member of lowest fitness from the mu+1 pool,
//! the tie-breaking rule choosing among equally bad members.

use sha2::{Digest, Sha256};

use crate::bitstring::BitString;
use crate::diversity::TieBreakRule;
use crate::error::{invalid, Result};
use crate::fitness::{JumpK, Objective};
use crate::pool::{Pool, Tracking};
use crate::variation::{crossover_unchecked, mutate_in_place, MutationRate, RandomSource};

/// Default evaluation budget of a single run.
pub const DEFAULT_MAX_EVALUATIONS: u64 = 1_000_000_000;

/// Provenance of the current offspring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffspringContext {
    pub offspring: BitString,
    pub used_crossover: bool,
    parents: [usize; 2],
}

impl OffspringContext {
    pub fn mutation(offspring: BitString, parent: usize) -> Self {
        OffspringContext {
            offspring,
            used_crossover: false,
            parents: [parent, parent],
        }
    }

    pub fn crossover(offspring: BitString, first: usize, second: usize) -> Self {
        OffspringContext {
            offspring,
            used_crossover: true,
            parents: [first, second],
        }
    }

    /// Two entries iff crossover was used (possibly the same index twice).
    pub fn parent_indices(&self) -> &[usize] {
        if self.used_crossover {
            &self.parents
        } else {
            &self.parents[..1]
        }
    }
}

/// mu individuals with cached fitness.
#[derive(Debug, Clone)]
pub struct Population {
    pool: Pool,
}

impl Population {
    /// `mu` independent uniform genotypes.
    pub fn random<O: Objective>(objective: &O, mu: usize, tracking: Tracking, rng: &mut RandomSource) -> Self {
        let n = objective.n();
        let mut pool = Pool::new(n, tracking);
        for _ in 0..mu {
            let g = rng.bit_string(n);
            let f = objective.value_of_ones(g.ones_count());
            pool.push(g, f);
        }
        Population { pool }
    }

    pub fn from_genotypes<O: Objective>(objective: &O, genotypes: Vec<BitString>, tracking: Tracking) -> Result<Self> {
        let mut pool = Pool::new(objective.n(), tracking);
        for g in genotypes {
            let f = objective.evaluate(&g)?;
            pool.push(g, f);
        }
        Ok(Population { pool })
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    pub fn members(&self) -> &[BitString] {
        self.pool.members()
    }

    pub fn fitness(&self) -> &[u64] {
        self.pool.fitness()
    }

    pub fn largest_species(&self) -> usize {
        self.pool.largest_species()
    }

    pub fn species_count(&self) -> usize {
        self.pool.species_count()
    }

    /// Order-independent digest of the genotypes, 16 hex digits.
    pub fn digest(&self) -> String {
        genotype_digest(self.members())
    }
}

pub(crate) fn genotype_digest(members: &[BitString]) -> String {
    let mut sorted: Vec<String> = members.iter().map(|g| g.to_string()).collect();
    sorted.sort();
    let mut hasher = Sha256::new();
    for s in &sorted {
        hasher.update(s.as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Which member left the pool in a generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Removed {
    Offspring,
    /// Population index of the removed member (the offspring now occupies it).
    Member(usize),
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub ctx: OffspringContext,
    pub offspring_fitness: u64,
    pub offspring_ones: usize,
    pub removed: Removed,
    /// One-bits of the genotype that left the pool.
    pub removed_ones: usize,
    /// Size of the lowest-fitness set the victim was chosen from.
    pub candidates: usize,
}

/// A configured (mu+1) GA on any objective.
#[derive(Debug, Clone)]
pub struct GaEngine<O> {
    objective: O,
    mu: usize,
    p_c: f64,
    rate: MutationRate,
    rule: TieBreakRule,
    check_invariants: bool,
}

impl<O: Objective> GaEngine<O> {
    pub fn new(objective: O, mu: usize, p_c: f64, chi: f64, rule: TieBreakRule) -> Result<Self> {
        if mu < 2 {
            return Err(invalid(format!("population size must be >= 2, got {mu}")));
        }
        if !(0.0..=1.0).contains(&p_c) {
            return Err(invalid(format!("crossover probability must lie in [0, 1], got {p_c}")));
        }
        let rate = MutationRate::new(chi, objective.n())?;
        Ok(GaEngine {
            objective,
            mu,
            p_c,
            rate,
            rule,
            check_invariants: false,
        })
    }

    /// Re-verifies every incrementally maintained statistic after each step.
    /// Costs O(mu^2 n) per generation.
    pub fn with_invariant_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn objective(&self) -> &O {
        &self.objective
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn rule(&self) -> TieBreakRule {
        self.rule
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn rate(&self) -> &MutationRate {
        &self.rate
    }

    pub fn initialize(&self, rng: &mut RandomSource) -> Population {
        Population::random(&self.objective, self.mu, self.rule.tracking(), rng)
    }

    /// Population over the given genotypes, tracking what the rule needs.
    pub fn population_from(&self, genotypes: Vec<BitString>) -> Result<Population> {
        if genotypes.len() != self.mu {
            return Err(invalid(format!(
                "expected {} genotypes, got {}",
                self.mu,
                genotypes.len()
            )));
        }
        Population::from_genotypes(&self.objective, genotypes, self.rule.tracking())
    }

    fn offspring(&self, pop: &Population, rng: &mut RandomSource) -> OffspringContext {
        let members = pop.members();
        let mu = members.len();
        if rng.unit() < self.p_c {
            let a = rng.below(mu);
            let b = rng.below(mu);
            let mut child = crossover_unchecked(&members[a], &members[b], rng);
            mutate_in_place(&mut child, &self.rate, rng);
            OffspringContext::crossover(child, a, b)
        } else {
            let a = rng.below(mu);
            let mut child = members[a].clone();
            mutate_in_place(&mut child, &self.rate, rng);
            OffspringContext::mutation(child, a)
        }
    }

    /// One generation: exactly one fitness evaluation.
    pub fn step(&self, pop: &mut Population, rng: &mut RandomSource) -> StepReport {
        let ctx = self.offspring(pop, rng);
        let offspring_ones = ctx.offspring.ones_count();
        let offspring_fitness = self.objective.value_of_ones(offspring_ones);
        let pop_min = pop.pool.min_fitness().expect("non-empty population");

        if offspring_fitness < pop_min {
            return StepReport {
                ctx,
                offspring_fitness,
                offspring_ones,
                removed: Removed::Offspring,
                removed_ones: offspring_ones,
                candidates: 1,
            };
        }

        let mu = pop.len();
        pop.pool.push(ctx.offspring.clone(), offspring_fitness);
        let worst = pop_min.min(offspring_fitness);
        let candidates: Vec<usize> = (0..=mu).filter(|&i| pop.pool.fitness()[i] == worst).collect();
        let victim = if candidates.len() == 1 {
            candidates[0]
        } else {
            self.rule.decide(&pop.pool, &candidates, Some(&ctx), rng).victim
        };
        debug_assert_eq!(pop.pool.fitness()[victim], worst, "removed member is not among the worst");
        let (gone, _) = pop.pool.swap_remove(victim);
        let removed = if victim == mu {
            Removed::Offspring
        } else {
            Removed::Member(victim)
        };

        if self.check_invariants {
            assert_eq!(pop.len(), mu);
            assert!(pop.pool.is_consistent(), "incremental pool statistics diverged");
            for (g, &f) in pop.members().iter().zip(pop.fitness()) {
                assert_eq!(self.objective.evaluate(g).unwrap(), f, "stale cached fitness");
            }
        }

        StepReport {
            ctx,
            offspring_fitness,
            offspring_ones,
            removed,
            removed_ones: gone.ones_count(),
            candidates: candidates.len(),
        }
    }

    /// Runs from a random initial population; the mu initial evaluations
    /// count toward the budget.
    pub fn run(&self, budget: u64, trajectory: Trajectory, rng: &mut RandomSource) -> RunRecord {
        let pop = self.initialize(rng);
        self.run_from(pop, self.mu as u64, budget, trajectory, rng)
    }

    /// Runs from `pop`, `spent` evaluations already charged.
    pub fn run_from(
        &self,
        mut pop: Population,
        spent: u64,
        budget: u64,
        trajectory: Trajectory,
        rng: &mut RandomSource,
    ) -> RunRecord {
        let optimum = self.objective.optimum_value();
        let mut evaluations = spent;
        let mut recorder = TrajectoryRecorder::new(trajectory, self.mu);
        let mut settled = pop
            .members()
            .iter()
            .filter(|g| self.objective.is_settled(g.ones_count()))
            .count();
        let mut plateau_arrival = (settled == pop.len()).then_some(evaluations);
        recorder.sample(evaluations, &pop, true);

        let mut found = pop.fitness().contains(&optimum);
        let mut best = pop.pool.max_fitness().unwrap_or(0);
        let mut steps = 0u64;
        while !found && evaluations < budget {
            let report = self.step(&mut pop, rng);
            evaluations += 1;
            steps += 1;
            if report.removed != Removed::Offspring {
                settled += self.objective.is_settled(report.offspring_ones) as usize;
                settled -= self.objective.is_settled(report.removed_ones) as usize;
            }
            if cfg!(debug_assertions) {
                let now = pop.pool.max_fitness().unwrap_or(0);
                debug_assert!(now >= best, "elitism violated: {best} -> {now}");
                best = now;
            }
            found = report.offspring_fitness == optimum;
            if plateau_arrival.is_none() && settled == pop.len() {
                plateau_arrival = Some(evaluations);
            }
            recorder.sample(evaluations, &pop, steps % recorder.stride == 0);
        }
        recorder.sample(evaluations, &pop, true);

        RunRecord {
            evaluations,
            evaluations_to_optimum: found.then_some(evaluations),
            plateau_arrival,
            trajectory: recorder.samples,
            final_population_digest: pop.digest(),
            receiver_success: None,
        }
    }
}

/// Whether and how often a run samples its species structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trajectory {
    Off,
    /// Every `mu` generations.
    EveryMu,
    Every(u64),
}

struct TrajectoryRecorder {
    on: bool,
    stride: u64,
    samples: Vec<TrajectorySample>,
}

impl TrajectoryRecorder {
    fn new(setting: Trajectory, mu: usize) -> Self {
        let (on, stride) = match setting {
            Trajectory::Off => (false, u64::MAX),
            Trajectory::EveryMu => (true, mu as u64),
            Trajectory::Every(s) => (true, s.max(1)),
        };
        TrajectoryRecorder {
            on,
            stride,
            samples: Vec::new(),
        }
    }

    fn sample(&mut self, evaluations: u64, pop: &Population, due: bool) {
        if !self.on || !due {
            return;
        }
        if self.samples.last().is_some_and(|s| s.evaluations == evaluations) {
            return;
        }
        self.samples.push(TrajectorySample {
            evaluations,
            largest_species: pop.largest_species(),
            species: pop.species_count(),
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectorySample {
    pub evaluations: u64,
    pub largest_species: usize,
    pub species: usize,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    /// Evaluations consumed, including initialization.
    pub evaluations: u64,
    /// `None` when the budget ran out first.
    pub evaluations_to_optimum: Option<u64>,
    /// First evaluation count at which every member was on the plateau or
    /// the optimum.
    pub plateau_arrival: Option<u64>,
    pub trajectory: Vec<TrajectorySample>,
    pub final_population_digest: String,
    /// Island model only: whether the receiver produced the optimum.
    pub receiver_success: Option<bool>,
}

impl RunRecord {
    pub fn success(&self) -> bool {
        self.evaluations_to_optimum.is_some()
    }
}

/// Selection scheme of a run: a tie-breaking rule inside the (mu+1) GA, or
/// the single-receiver island model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mechanism {
    TieBreak(TieBreakRule),
    Island { receiver_mutation: bool },
}

impl Mechanism {
    pub fn id(&self) -> &'static str {
        match self {
            Mechanism::TieBreak(rule) => rule.id(),
            Mechanism::Island { .. } => "island",
        }
    }

    /// Parses a mechanism identifier; fitness sharing defaults to
    /// `sigma = 2k`, `alpha = 1`.
    pub fn from_id(id: &str, k: usize, sigma: Option<f64>, alpha: Option<f64>) -> Result<Self> {
        if id == "island" {
            return Ok(Mechanism::Island {
                receiver_mutation: true,
            });
        }
        let sigma = sigma.unwrap_or(2.0 * k as f64);
        let alpha = alpha.unwrap_or(1.0);
        Ok(Mechanism::TieBreak(TieBreakRule::from_id(id, sigma, alpha)?))
    }
}

/// Full parameterization of a run on Jump_k.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub n: usize,
    pub k: usize,
    pub mu: usize,
    pub p_c: f64,
    pub chi: f64,
    pub mechanism: Mechanism,
    pub max_evaluations: u64,
    pub seed: u64,
    pub trajectory: Trajectory,
}

impl GaConfig {
    pub fn new(n: usize, k: usize, mu: usize) -> Self {
        GaConfig {
            n,
            k,
            mu,
            p_c: 1.0,
            chi: 1.0,
            mechanism: Mechanism::TieBreak(TieBreakRule::UniformRandom),
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
            seed: 0,
            trajectory: Trajectory::EveryMu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        JumpK::new(self.n, self.k)?;
        if self.mu < 2 {
            return Err(invalid(format!("mu must be >= 2, got {}", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.p_c) {
            return Err(invalid(format!("p_c must lie in [0, 1], got {}", self.p_c)));
        }
        MutationRate::new(self.chi, self.n)?;
        if self.max_evaluations < self.mu as u64 {
            return Err(invalid("max_evaluations must cover the initial population"));
        }
        Ok(())
    }

    pub fn jump(&self) -> Result<JumpK> {
        JumpK::new(self.n, self.k)
    }

    pub fn engine(&self) -> Result<GaEngine<JumpK>> {
        self.validate()?;
        let rule = match self.mechanism {
            Mechanism::TieBreak(rule) => rule,
            Mechanism::Island { .. } => return Err(invalid("island model configs have no (mu+1) GA engine")),
        };
        GaEngine::new(self.jump()?, self.mu, self.p_c, self.chi, rule)
    }
}

/// Runs the configured algorithm until the optimum appears or the budget is
/// spent.
pub fn run(config: &GaConfig) -> Result<RunRecord> {
    config.validate()?;
    let mut rng = RandomSource::new(config.seed);
    match config.mechanism {
        Mechanism::Island { .. } => crate::island::run_island_model(config),
        Mechanism::TieBreak(_) => Ok(config
            .engine()?
            .run(config.max_evaluations, config.trajectory, &mut rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::OneMax;

    fn jump_engine(n: usize, k: usize, mu: usize, p_c: f64, rule: TieBreakRule) -> GaEngine<JumpK> {
        GaEngine::new(JumpK::new(n, k).unwrap(), mu, p_c, 1.0, rule)
            .unwrap()
            .with_invariant_checks(true)
    }

    #[test]
    fn initialization_size_and_distribution() {
        let engine = GaEngine::new(OneMax { n: 4 }, 2, 1.0, 1.0, TieBreakRule::UniformRandom).unwrap();
        let mut rng = RandomSource::new(8);
        let mut counts = [0u64; 16];
        let trials = 40_000;
        for _ in 0..trials {
            let pop = engine.initialize(&mut rng);
            assert_eq!(pop.len(), 2);
            for g in pop.members() {
                counts[g.words()[0] as usize] += 1;
            }
        }
        let expected = 2.0 * trials as f64 / 16.0;
        for c in counts {
            assert!((c as f64 - expected).abs() < 5.0 * expected.sqrt());
        }
    }

    #[test]
    fn initial_ones_average_half() {
        let n = 60;
        let engine = GaEngine::new(OneMax { n }, 3, 1.0, 1.0, TieBreakRule::UniformRandom).unwrap();
        let mut rng = RandomSource::new(9);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| engine.initialize(&mut rng).members()[0].ones_count())
            .sum();
        let mean = total as f64 / draws as f64;
        let sd = (n as f64 / 4.0 / draws as f64).sqrt();
        assert!((mean - n as f64 / 2.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn strictly_better_offspring_survives() {
        let engine = GaEngine::new(OneMax { n: 30 }, 4, 0.0, 1.0, TieBreakRule::UniformRandom)
            .unwrap()
            .with_invariant_checks(true);
        let mut rng = RandomSource::new(1);
        let mut pop = engine.initialize(&mut rng);
        for _ in 0..2000 {
            let worst = pop.pool().min_fitness().unwrap();
            let r = engine.step(&mut pop, &mut rng);
            if r.offspring_fitness > worst {
                assert!(pop.members().contains(&r.ctx.offspring));
                assert_ne!(r.removed, Removed::Offspring);
            }
            assert_eq!(pop.len(), 4);
        }
    }

    #[test]
    fn mutation_only_uses_one_parent() {
        let engine = jump_engine(20, 2, 5, 0.0, TieBreakRule::UniformRandom);
        let mut rng = RandomSource::new(2);
        let mut pop = engine.initialize(&mut rng);
        for _ in 0..500 {
            let r = engine.step(&mut pop, &mut rng);
            assert_eq!(r.ctx.parent_indices().len(), 1);
            assert!(!r.ctx.used_crossover);
        }
        let engine = jump_engine(20, 2, 5, 1.0, TieBreakRule::UniformRandom);
        let r = engine.step(&mut pop, &mut rng);
        assert_eq!(r.ctx.parent_indices().len(), 2);
    }

    /// Plateau population of three members: under uniform tie-breaking each
    /// of the four tied pool members is removed equally often.
    #[test]
    fn uniform_removal_frequencies() {
        let f = JumpK::new(6, 2).unwrap();
        let members: Vec<BitString> = ["111100", "111010", "110110"].iter().map(|s| s.parse().unwrap()).collect();
        let engine = GaEngine::new(f, 3, 0.0, 1e-9, TieBreakRule::UniformRandom).unwrap();
        let mut rng = RandomSource::new(5);
        let mut removed = [0u64; 4];
        let trials = 100_000;
        for _ in 0..trials {
            let mut pop = engine.population_from(members.clone()).unwrap();
            let r = engine.step(&mut pop, &mut rng);
            // With a vanishing rate the offspring is a copy of its parent and
            // ties with all three members: four candidates.
            assert_eq!(r.candidates, 4);
            match r.removed {
                Removed::Offspring => removed[3] += 1,
                Removed::Member(i) => removed[i] += 1,
            }
        }
        for c in removed {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.25).abs() < 4.0 * (0.25 * 0.75 / trials as f64).sqrt(), "{removed:?}");
        }
    }

    #[test]
    fn smoke_run_reaches_optimum() {
        let mut cfg = GaConfig::new(20, 2, 2);
        cfg.max_evaluations = 10_000_000;
        for seed in 0..5 {
            cfg.seed = seed;
            let rec = run(&cfg).unwrap();
            let t = rec.evaluations_to_optimum.expect("optimum within budget");
            assert!(t < cfg.max_evaluations);
            if let Some(p) = rec.plateau_arrival {
                assert!(p <= t);
            }
        }
    }

    #[test]
    fn seeded_optimum_needs_no_evaluations() {
        let engine = jump_engine(10, 3, 3, 1.0, TieBreakRule::UniformRandom);
        let pop = engine
            .population_from(vec![BitString::ones(10), BitString::zeros(10), BitString::zeros(10)])
            .unwrap();
        let rec = engine.run_from(pop, 0, 1000, Trajectory::EveryMu, &mut RandomSource::new(1));
        assert_eq!(rec.evaluations_to_optimum, Some(0));
    }

    #[test]
    fn identical_seeds_identical_records() {
        let mut cfg = GaConfig::new(30, 2, 6);
        cfg.seed = 77;
        cfg.mechanism = Mechanism::TieBreak(TieBreakRule::TotalHammingMax);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn budget_exhaustion_is_a_marker() {
        let mut cfg = GaConfig::new(40, 6, 4);
        cfg.p_c = 0.0;
        cfg.max_evaluations = 500;
        let rec = run(&cfg).unwrap();
        assert_eq!(rec.evaluations_to_optimum, None);
        assert_eq!(rec.evaluations, 500);
    }

    #[test]
    fn config_validation() {
        let mut cfg = GaConfig::new(10, 3, 1);
        assert!(cfg.validate().is_err());
        cfg.mu = 4;
        assert!(cfg.validate().is_ok());
        cfg.p_c = 1.5;
        assert!(cfg.validate().is_err());
        cfg.p_c = 0.5;
        cfg.chi = 11.0;
        assert!(cfg.validate().is_err());
        cfg.chi = 1.0;
        cfg.k = 0;
        assert!(cfg.validate().is_err());
    }

    /// Every rule keeps the population legal under the full invariant check
    /// (incremental statistics, cached fitness, removal among the worst).
    #[test]
    fn all_rules_keep_invariants() {
        for id in crate::diversity::RULE_IDS {
            let rule = TieBreakRule::from_id(id, 4.0, 1.0).unwrap();
            let engine = jump_engine(24, 2, 6, 0.7, rule);
            let mut rng = RandomSource::new(31);
            let mut pop = engine.initialize(&mut rng);
            let mut best = 0;
            for _ in 0..3000 {
                engine.step(&mut pop, &mut rng);
                let now = pop.pool().max_fitness().unwrap();
                assert!(now >= best, "{id}: elitism");
                best = now;
            }
        }
    }

    /// Duplicate minimization never lets the largest species grow when the
    /// offspring itself is among the tied worst members.
    #[test]
    fn duplicate_minimization_largest_species_non_increasing_on_ties() {
        let engine = jump_engine(30, 3, 10, 1.0, TieBreakRule::DuplicateMinimization);
        let mut rng = RandomSource::new(12);
        let mut pop = engine.initialize(&mut rng);
        for _ in 0..20_000 {
            let before = pop.largest_species();
            let worst = pop.pool().min_fitness().unwrap();
            let r = engine.step(&mut pop, &mut rng);
            if r.candidates > 1 && r.offspring_fitness == worst {
                assert!(pop.largest_species() <= before);
            }
        }
    }

    #[test]
    fn trajectory_samples_every_mu() {
        let mut cfg = GaConfig::new(30, 2, 5);
        cfg.seed = 3;
        let rec = run(&cfg).unwrap();
        assert!(rec.trajectory.len() >= 2);
        assert!(rec.trajectory.windows(2).all(|w| w[0].evaluations < w[1].evaluations));
        for s in &rec.trajectory {
            assert!(s.largest_species >= 1 && s.largest_species <= 5);
            assert!(s.largest_species * s.species >= 5);
        }
    }
}
