//! The (mu+1) genetic algorithm on Jump_k: bit strings, fitness, variation
//! operators, the steady-state engine with pluggable tie-breaking, the
//! single-receiver island model, analytic oracles and the experiment harness.

pub mod analytics;
pub mod bitstring;
pub mod diversity;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod fitness;
pub mod island;
pub mod pool;
pub mod variation;

pub use bitstring::BitString;
pub use diversity::{
    break_ties_convex_hull, break_ties_deterministic_crowding, break_ties_duplicate_elimination,
    break_ties_duplicate_minimization, break_ties_fitness_sharing, break_ties_total_hamming, break_ties_uniform,
    RemovalDecision, TieBreakRule,
};
pub use engine::{
    run, GaConfig, GaEngine, Mechanism, OffspringContext, Population, RunRecord, StepReport, Trajectory,
    TrajectorySample, DEFAULT_MAX_EVALUATIONS,
};
pub use error::{Error, Result};
pub use fitness::{JumpK, Objective, OneMax, PointClass};
pub use island::{run_island_model, IslandModel, IslandState};
pub use pool::{Pool, Tracking};
pub use variation::{derive_seed, mix64, standard_bit_mutation, uniform_crossover, MutationRate, RandomSource};
