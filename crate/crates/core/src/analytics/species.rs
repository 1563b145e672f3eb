use crate::bitstring::BitString;
use crate::engine::Population;

/// Partition of a population into groups of identical genotypes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesPartition {
    /// (genotype, multiplicity), largest species first, ties by genotype.
    pub species: Vec<(BitString, usize)>,
}

impl SpeciesPartition {
    pub fn from_genotypes<'a>(genotypes: impl IntoIterator<Item = &'a BitString>) -> Self {
        let mut sorted: Vec<&BitString> = genotypes.into_iter().collect();
        sorted.sort();
        let mut species: Vec<(BitString, usize)> = Vec::new();
        for g in sorted {
            match species.last_mut() {
                Some((last, count)) if last == g => *count += 1,
                _ => species.push((g.clone(), 1)),
            }
        }
        species.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        SpeciesPartition { species }
    }

    /// Size of the largest species, Y.
    pub fn largest(&self) -> usize {
        self.species.first().map_or(0, |s| s.1)
    }

    pub fn count(&self) -> usize {
        self.species.len()
    }

    pub fn total(&self) -> usize {
        self.species.iter().map(|s| s.1).sum()
    }
}

pub fn partition_species(pop: &Population) -> SpeciesPartition {
    SpeciesPartition::from_genotypes(pop.members())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(items: &[&str]) -> SpeciesPartition {
        let gs: Vec<BitString> = items.iter().map(|s| s.parse().unwrap()).collect();
        SpeciesPartition::from_genotypes(&gs)
    }

    #[test]
    fn examples() {
        let p = part(&["0101", "0101", "0101"]);
        assert_eq!((p.largest(), p.count()), (3, 1));
        let p = part(&["0001", "0010", "0100"]);
        assert_eq!((p.largest(), p.count()), (1, 3));
        let p = part(&["01", "01", "10"]);
        assert_eq!((p.largest(), p.count(), p.total()), (2, 2, 3));
    }

    #[test]
    fn bounds_on_largest() {
        let p = part(&["00", "01", "01", "10", "10", "11"]);
        assert_eq!(p.total(), 6);
        assert!(p.largest() >= p.total().div_ceil(p.count()));
    }

    #[test]
    fn matches_incremental_pool_counts() {
        use crate::diversity::TieBreakRule;
        use crate::engine::GaEngine;
        use crate::fitness::JumpK;
        use crate::variation::RandomSource;

        let engine = GaEngine::new(JumpK::new(16, 2).unwrap(), 12, 1.0, 1.0, TieBreakRule::UniformRandom).unwrap();
        let mut rng = RandomSource::new(5);
        let mut pop = engine.initialize(&mut rng);
        for _ in 0..5000 {
            engine.step(&mut pop, &mut rng);
            let p = partition_species(&pop);
            assert_eq!(p.largest(), pop.largest_species());
            assert_eq!(p.count(), pop.species_count());
        }
    }
}
