//! Species instrumentation, closed-form success probabilities, empirical
//! transition estimates and exact small-instance oracles.

pub mod enumeration;
pub mod markov;
pub mod probability;
pub mod species;
pub mod transitions;

pub use enumeration::{enumerate_success_probability, plateau_pair, simulate_pair_success};
pub use markov::{brute_force_expected_runtime, exact_expected_runtime, ExpectedRuntime};
pub use probability::{jump_success_probability, jump_to_opt_bound, SuccessProbability};
pub use species::{partition_species, SpeciesPartition};
pub use transitions::{estimate_transition_probabilities, prepare_plateau_population, TransitionEstimate};
