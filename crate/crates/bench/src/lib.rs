//! Fixtures shared by the benchmarks.

use jumpga::{GaEngine, JumpK, Population, RandomSource, TieBreakRule};

/// Engine on Jump_k(n) with a population of random plateau points, the
/// state in which tie-breaking cost dominates.
pub fn plateau_fixture(n: usize, k: usize, mu: usize, rule: TieBreakRule, seed: u64) -> (GaEngine<JumpK>, Population) {
    let engine = GaEngine::new(JumpK::new(n, k).expect("valid jump"), mu, 1.0, 1.0, rule).expect("valid engine");
    let mut rng = RandomSource::new(seed);
    let genotypes = (0..mu)
        .map(|_| {
            let mut g = jumpga::BitString::ones(n);
            let mut zeros = 0;
            while zeros < k {
                let i = rng.below(n);
                if g.get(i) {
                    g.set(i, false);
                    zeros += 1;
                }
            }
            g
        })
        .collect();
    let pop = engine.population_from(genotypes).expect("mu genotypes");
    (engine, pop)
}
