//! Single-receiver island model: mu independent (1+1) EAs and one receiver
//! island that only recombines copies of two island bests.
//!
//! Rounds are synchronous. In every round each island performs one (1+1) EA
//! step and the receiver crosses the bests two distinct islands held at the
//! start of the round, optionally mutates the result, and keeps it only if it
//! is strictly fitter than its resident. A round costs mu + 1 evaluations.

use crate::bitstring::BitString;
use crate::engine::{genotype_digest, GaConfig, Mechanism, RunRecord, Trajectory, TrajectorySample};
use crate::error::{invalid, Result};
use crate::fitness::{JumpK, Objective};
use crate::pool::{Pool, Tracking};
use crate::variation::{crossover_unchecked, mutate_in_place, MutationRate, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resident {
    pub genotype: BitString,
    pub fitness: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IslandState {
    pub islands: Vec<Resident>,
    pub receiver: Option<Resident>,
    pub evaluations: u64,
}

/// What happened during one round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundEvents {
    pub island_optimum: bool,
    pub receiver_optimum: bool,
    /// Islands the receiver recombined this round.
    pub receiver_pair: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct IslandModel {
    objective: JumpK,
    mu: usize,
    rate: MutationRate,
    receiver_mutation: bool,
}

impl IslandModel {
    pub fn new(objective: JumpK, mu: usize, chi: f64, receiver_mutation: bool) -> Result<Self> {
        if mu < 2 {
            return Err(invalid(format!("the receiver needs at least two islands, got mu={mu}")));
        }
        let rate = MutationRate::new(chi, objective.n())?;
        Ok(IslandModel {
            objective,
            mu,
            rate,
            receiver_mutation,
        })
    }

    pub fn from_config(config: &GaConfig) -> Result<Self> {
        let receiver_mutation = match config.mechanism {
            Mechanism::Island { receiver_mutation } => receiver_mutation,
            Mechanism::TieBreak(_) => return Err(invalid("config does not select the island model")),
        };
        IslandModel::new(config.jump()?, config.mu, config.chi, receiver_mutation)
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// Uniform random island bests, empty receiver; charges mu evaluations.
    pub fn initialize(&self, rng: &mut RandomSource) -> IslandState {
        let islands = (0..self.mu)
            .map(|_| self.resident(rng.bit_string(self.objective.n())))
            .collect();
        IslandState {
            islands,
            receiver: None,
            evaluations: self.mu as u64,
        }
    }

    pub fn state_from(&self, genotypes: Vec<BitString>) -> Result<IslandState> {
        if genotypes.len() != self.mu {
            return Err(invalid(format!("expected {} islands, got {}", self.mu, genotypes.len())));
        }
        for g in &genotypes {
            self.objective.evaluate(g)?;
        }
        Ok(IslandState {
            islands: genotypes.into_iter().map(|g| self.resident(g)).collect(),
            receiver: None,
            evaluations: 0,
        })
    }

    fn resident(&self, genotype: BitString) -> Resident {
        let fitness = self.objective.value_of_ones(genotype.ones_count());
        Resident { genotype, fitness }
    }

    /// Receiver offspring from two island bests, before acceptance.
    pub fn receiver_offspring(&self, a: &BitString, b: &BitString, rng: &mut RandomSource) -> BitString {
        let mut child = crossover_unchecked(a, b, rng);
        if self.receiver_mutation {
            mutate_in_place(&mut child, &self.rate, rng);
        }
        child
    }

    /// One synchronous round.
    pub fn island_step(&self, state: &mut IslandState, rng: &mut RandomSource) -> RoundEvents {
        let optimum = self.objective.optimum_value();
        let mut events = RoundEvents::default();

        // Two distinct islands, read before this round's island updates.
        let first = rng.below(self.mu);
        let mut second = rng.below(self.mu - 1);
        if second >= first {
            second += 1;
        }
        events.receiver_pair = (first, second);
        let parents = (
            state.islands[first].genotype.clone(),
            state.islands[second].genotype.clone(),
        );

        for island in &mut state.islands {
            let mut child = island.genotype.clone();
            mutate_in_place(&mut child, &self.rate, rng);
            let f = self.objective.value_of_ones(child.ones_count());
            let accept = f > island.fitness || (f == island.fitness && rng.coin());
            if accept {
                island.genotype = child;
                island.fitness = f;
            }
            events.island_optimum |= island.fitness == optimum;
        }

        let child = self.receiver_offspring(&parents.0, &parents.1, rng);
        let f = self.objective.value_of_ones(child.ones_count());
        events.receiver_optimum = f == optimum;
        let replace = state.receiver.as_ref().is_none_or(|r| f > r.fitness);
        if replace {
            state.receiver = Some(Resident {
                genotype: child,
                fitness: f,
            });
        }
        state.evaluations += self.mu as u64 + 1;
        events
    }

    fn settled(&self, state: &IslandState) -> bool {
        state
            .islands
            .iter()
            .all(|r| self.objective.is_settled(r.genotype.ones_count()))
    }

    fn sample(state: &IslandState) -> TrajectorySample {
        let pool = Pool::from_members(
            state.islands.iter().map(|r| (r.genotype.clone(), r.fitness)).collect(),
            Tracking::default(),
        );
        TrajectorySample {
            evaluations: state.evaluations,
            largest_species: pool.largest_species(),
            species: pool.species_count(),
        }
    }

    /// Rounds until the optimum appears on any island or at the receiver, or
    /// until another round would exceed `budget`.
    pub fn run_from(&self, mut state: IslandState, budget: u64, trajectory: Trajectory, rng: &mut RandomSource) -> RunRecord {
        let optimum = self.objective.optimum_value();
        let round_cost = self.mu as u64 + 1;
        let stride = match trajectory {
            Trajectory::Off => None,
            Trajectory::EveryMu => Some(1),
            Trajectory::Every(s) => Some(s.div_ceil(round_cost).max(1)),
        };
        let mut samples = Vec::new();
        if stride.is_some() {
            samples.push(Self::sample(&state));
        }
        let mut plateau_arrival = self.settled(&state).then_some(state.evaluations);
        let mut found = state.islands.iter().any(|r| r.fitness == optimum);
        let mut by_receiver = false;
        let mut rounds = 0u64;
        while !found && state.evaluations + round_cost <= budget {
            let events = self.island_step(&mut state, rng);
            rounds += 1;
            found = events.island_optimum || events.receiver_optimum;
            by_receiver = events.receiver_optimum;
            if plateau_arrival.is_none() && self.settled(&state) {
                plateau_arrival = Some(state.evaluations);
            }
            if let Some(s) = stride {
                if rounds % s == 0 || found {
                    samples.push(Self::sample(&state));
                }
            }
        }
        let mut members: Vec<BitString> = state.islands.iter().map(|r| r.genotype.clone()).collect();
        if let Some(r) = &state.receiver {
            members.push(r.genotype.clone());
        }
        RunRecord {
            evaluations: state.evaluations,
            evaluations_to_optimum: found.then_some(state.evaluations),
            plateau_arrival,
            trajectory: samples,
            final_population_digest: genotype_digest(&members),
            receiver_success: Some(found && by_receiver),
        }
    }
}

pub fn run_island_model(config: &GaConfig) -> Result<RunRecord> {
    config.validate()?;
    let model = IslandModel::from_config(config)?;
    let mut rng = RandomSource::new(config.seed);
    let state = model.initialize(&mut rng);
    Ok(model.run_from(state, config.max_evaluations, config.trajectory, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plateau(n: usize, zeros: &[usize]) -> BitString {
        BitString::with_zeros_at(n, zeros)
    }

    fn island_config(n: usize, k: usize, mu: usize, seed: u64) -> GaConfig {
        let mut cfg = GaConfig::new(n, k, mu);
        cfg.mechanism = Mechanism::Island {
            receiver_mutation: true,
        };
        cfg.seed = seed;
        cfg
    }

    #[test]
    fn rejects_single_island() {
        let f = JumpK::new(10, 2).unwrap();
        assert!(IslandModel::new(f, 1, 1.0, true).is_err());
        assert!(run_island_model(&island_config(10, 2, 1, 0)).is_err());
    }

    #[test]
    fn optimal_islands_are_a_fixed_point() {
        let f = JumpK::new(12, 2).unwrap();
        let model = IslandModel::new(f, 3, 1.0, true).unwrap();
        let mut state = model.state_from(vec![BitString::ones(12); 3]).unwrap();
        let mut rng = RandomSource::new(1);
        for _ in 0..200 {
            model.island_step(&mut state, &mut rng);
            assert!(state.islands.iter().all(|r| r.genotype == BitString::ones(12)));
        }
    }

    #[test]
    fn island_and_receiver_fitness_never_decrease() {
        let f = JumpK::new(30, 3).unwrap();
        let model = IslandModel::new(f, 4, 1.0, true).unwrap();
        let mut rng = RandomSource::new(2);
        let mut state = model.initialize(&mut rng);
        let mut prev = state.clone();
        for _ in 0..3000 {
            let events = model.island_step(&mut state, &mut rng);
            assert_ne!(events.receiver_pair.0, events.receiver_pair.1);
            for (a, b) in prev.islands.iter().zip(&state.islands) {
                assert!(b.fitness >= a.fitness);
            }
            if let (Some(a), Some(b)) = (&prev.receiver, &state.receiver) {
                assert!(b.fitness >= a.fitness);
            }
            assert_eq!(state.evaluations, prev.evaluations + 5);
            prev = state.clone();
        }
    }

    /// Receiver replacement is strict: an equally fit offspring never
    /// displaces the resident.
    #[test]
    fn receiver_replacement_is_strict() {
        let n = 10;
        let f = JumpK::new(n, 2).unwrap();
        // Identical islands, no mutation at the receiver: the offspring always
        // equals the islands' genotype and ties with the resident.
        let model = IslandModel::new(f, 2, 1e-9, false).unwrap();
        let g = plateau(n, &[0, 1]);
        let mut state = model.state_from(vec![g.clone(), g.clone()]).unwrap();
        let resident = plateau(n, &[2, 3]);
        state.receiver = Some(Resident {
            genotype: resident.clone(),
            fitness: n as u64,
        });
        let mut rng = RandomSource::new(3);
        for _ in 0..50 {
            model.island_step(&mut state, &mut rng);
            assert_eq!(state.receiver.as_ref().unwrap().genotype, resident);
        }
    }

    /// Islands whose plateau points share no zero: a single receiver attempt
    /// yields the optimum with probability at least 4^-k (1-1/n)^n.
    #[test]
    fn complementary_pair_success_rate() {
        let (n, k) = (20, 2);
        let f = JumpK::new(n, k).unwrap();
        let model = IslandModel::new(f, 2, 1.0, true).unwrap();
        let a = plateau(n, &[0, 1]);
        let b = plateau(n, &[2, 3]);
        let mut rng = RandomSource::new(4);
        let trials = 200_000;
        let hits = (0..trials)
            .filter(|_| model.receiver_offspring(&a, &b, &mut rng).is_all_ones())
            .count();
        let freq = hits as f64 / trials as f64;
        let bound = 0.25f64.powi(k as i32) * (1.0 - 1.0 / n as f64).powi(n as i32);
        let se = (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(freq > bound - 4.0 * se, "freq {freq} bound {bound}");
    }

    #[test]
    fn smoke_run_and_determinism() {
        let mut cfg = island_config(20, 2, 2, 9);
        cfg.max_evaluations = 100_000_000;
        let rec = run_island_model(&cfg).unwrap();
        assert!(rec.success());
        assert!(rec.receiver_success.is_some());
        if let (Some(p), Some(t)) = (rec.plateau_arrival, rec.evaluations_to_optimum) {
            assert!(p <= t);
        }
        assert_eq!(rec, run_island_model(&cfg).unwrap());
        assert_eq!((rec.evaluations - 2) % 3, 0);
    }

    #[test]
    fn plateau_arrival_means_all_islands_settled() {
        let n = 16;
        let f = JumpK::new(n, 2).unwrap();
        let model = IslandModel::new(f, 3, 1.0, true).unwrap();
        let state = model
            .state_from(vec![plateau(n, &[0, 1]), plateau(n, &[2, 3]), plateau(n, &[4, 5])])
            .unwrap();
        let rec = model.run_from(state, 100, Trajectory::Off, &mut RandomSource::new(1));
        assert_eq!(rec.plateau_arrival, Some(0));
    }
}
