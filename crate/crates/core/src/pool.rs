//! The selection pool: population members plus, transiently, the offspring.
//!
//! Besides genotypes and cached fitness the pool maintains the statistics the
//! tie-breaking rules consult, updated in O(mu) (or O(n)) per insert/remove
//! instead of being recomputed from scratch on every generation:
//!
//! - species multiplicities (always),
//! - the pairwise Hamming distance matrix and its row sums (optional),
//! - per-position one-bit counts (optional).

use std::collections::HashMap;

use crate::bitstring::BitString;

/// Which optional statistics a pool maintains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tracking {
    pub distances: bool,
    pub position_counts: bool,
}

impl Tracking {
    pub fn all() -> Self {
        Tracking {
            distances: true,
            position_counts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DistanceCache {
    rows: Vec<Vec<u32>>,
    row_sums: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Pool {
    members: Vec<BitString>,
    fitness: Vec<u64>,
    species: HashMap<BitString, usize>,
    distances: Option<DistanceCache>,
    position_ones: Option<Vec<u32>>,
    n: usize,
}

impl Pool {
    pub fn new(n: usize, tracking: Tracking) -> Self {
        Pool {
            members: Vec::new(),
            fitness: Vec::new(),
            species: HashMap::new(),
            distances: tracking.distances.then(|| DistanceCache {
                rows: Vec::new(),
                row_sums: Vec::new(),
            }),
            position_ones: tracking.position_counts.then(|| vec![0; n]),
            n,
        }
    }

    /// Pool holding `members` with their fitness values, statistics built by
    /// successive insertion.
    pub fn from_members(members: Vec<(BitString, u64)>, tracking: Tracking) -> Self {
        let n = members.first().map_or(0, |(g, _)| g.len());
        let mut pool = Pool::new(n, tracking);
        for (g, f) in members {
            pool.push(g, f);
        }
        pool
    }

    pub fn tracking(&self) -> Tracking {
        Tracking {
            distances: self.distances.is_some(),
            position_counts: self.position_ones.is_some(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn bit_len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    #[inline]
    pub fn fitness(&self) -> &[u64] {
        &self.fitness
    }

    #[inline]
    pub fn genotype(&self, i: usize) -> &BitString {
        &self.members[i]
    }

    pub fn push(&mut self, g: BitString, f: u64) {
        assert_eq!(g.len(), self.n, "pool member length");
        if let Some(cache) = &mut self.distances {
            let mut new_row = Vec::with_capacity(self.members.len() + 1);
            let mut new_sum = 0u64;
            for (i, other) in self.members.iter().enumerate() {
                let d = g.hamming_distance_unchecked(other) as u32;
                cache.rows[i].push(d);
                cache.row_sums[i] += d as u64;
                new_row.push(d);
                new_sum += d as u64;
            }
            new_row.push(0);
            cache.rows.push(new_row);
            cache.row_sums.push(new_sum);
        }
        if let Some(counts) = &mut self.position_ones {
            for_each_one(&g, |i| counts[i] += 1);
        }
        *self.species.entry(g.clone()).or_insert(0) += 1;
        self.members.push(g);
        self.fitness.push(f);
    }

    /// Removes member `idx`; the last member takes its index.
    pub fn swap_remove(&mut self, idx: usize) -> (BitString, u64) {
        if let Some(cache) = &mut self.distances {
            for (i, sum) in cache.row_sums.iter_mut().enumerate() {
                *sum -= cache.rows[i][idx] as u64;
            }
            cache.rows.swap_remove(idx);
            cache.row_sums.swap_remove(idx);
            for row in &mut cache.rows {
                row.swap_remove(idx);
            }
        }
        let g = self.members.swap_remove(idx);
        let f = self.fitness.swap_remove(idx);
        if let Some(counts) = &mut self.position_ones {
            for_each_one(&g, |i| counts[i] -= 1);
        }
        match self.species.get_mut(&g) {
            Some(c) if *c > 1 => *c -= 1,
            _ => {
                self.species.remove(&g);
            }
        }
        (g, f)
    }

    pub fn min_fitness(&self) -> Option<u64> {
        self.fitness.iter().copied().min()
    }

    pub fn max_fitness(&self) -> Option<u64> {
        self.fitness.iter().copied().max()
    }

    /// Indices of all members of minimal fitness.
    pub fn lowest_fitness_indices(&self) -> Vec<usize> {
        let Some(min) = self.min_fitness() else {
            return Vec::new();
        };
        (0..self.len()).filter(|&i| self.fitness[i] == min).collect()
    }

    /// Number of copies of `g` in the pool.
    pub fn multiplicity(&self, g: &BitString) -> usize {
        self.species.get(g).copied().unwrap_or(0)
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    /// Size of the largest species, Y.
    pub fn largest_species(&self) -> usize {
        self.species.values().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> u32 {
        match &self.distances {
            Some(cache) => cache.rows[i][j],
            None => self.members[i].hamming_distance_unchecked(&self.members[j]) as u32,
        }
    }

    /// Sum of Hamming distances from member `i` to every pool member.
    pub fn distance_sum(&self, i: usize) -> u64 {
        match &self.distances {
            Some(cache) => cache.row_sums[i],
            None => (0..self.len()).map(|j| self.distance(i, j) as u64).sum(),
        }
    }

    /// Ordered-pair total Hamming distance g(pool).
    pub fn total_distance(&self) -> u64 {
        (0..self.len()).map(|i| self.distance_sum(i)).sum()
    }

    /// Number of positions holding both a 0 and a 1 in the pool without
    /// member `z`.
    pub fn mixed_positions_without(&self, z: usize) -> usize {
        let rest = self.len() as u32 - 1;
        let zg = &self.members[z];
        match &self.position_ones {
            Some(counts) => counts
                .iter()
                .enumerate()
                .filter(|&(i, &c)| {
                    let c = c - zg.get(i) as u32;
                    c > 0 && c < rest
                })
                .count(),
            None => {
                let mut any_one = vec![0u64; zg.words().len()];
                let mut any_zero = vec![0u64; zg.words().len()];
                for (j, g) in self.members.iter().enumerate() {
                    if j == z {
                        continue;
                    }
                    for (w, &word) in g.words().iter().enumerate() {
                        any_one[w] |= word;
                        any_zero[w] |= !word;
                    }
                }
                let tail = BitString::ones(self.n);
                any_one
                    .iter()
                    .zip(&any_zero)
                    .zip(tail.words())
                    .map(|((a, b), m)| (a & b & m).count_ones() as usize)
                    .sum()
            }
        }
    }

    /// Recomputes every maintained statistic from scratch and reports whether
    /// it agrees with the incremental state.
    pub fn is_consistent(&self) -> bool {
        let fresh = Pool::from_members(
            self.members.iter().cloned().zip(self.fitness.iter().copied()).collect(),
            self.tracking(),
        );
        fresh.species == self.species
            && fresh.distances == self.distances
            && fresh.position_ones == self.position_ones
    }
}

#[inline]
fn for_each_one(g: &BitString, mut f: impl FnMut(usize)) {
    for (w, &word) in g.words().iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            f(w * 64 + t);
            bits &= bits - 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variation::RandomSource;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn species_and_distances() {
        let pool = Pool::from_members(
            vec![(bs("000"), 0), (bs("011"), 2), (bs("101"), 2), (bs("011"), 2)],
            Tracking::all(),
        );
        assert_eq!(pool.multiplicity(&bs("011")), 2);
        assert_eq!(pool.species_count(), 3);
        assert_eq!(pool.largest_species(), 2);
        assert_eq!(pool.distance(0, 1), 2);
        assert_eq!(pool.distance_sum(0), 6);
        assert_eq!(pool.lowest_fitness_indices(), vec![0]);
    }

    #[test]
    fn total_distance_hand_value() {
        let pool = Pool::from_members(
            vec![(bs("000"), 0), (bs("011"), 0), (bs("101"), 0)],
            Tracking::default(),
        );
        assert_eq!(pool.total_distance(), 12);
    }

    #[test]
    fn mixed_positions_with_and_without_counts() {
        for tracking in [Tracking::default(), Tracking::all()] {
            let pool = Pool::from_members(vec![(bs("00"), 0), (bs("01"), 0), (bs("01"), 0)], tracking);
            assert_eq!(pool.mixed_positions_without(0), 0);
            assert_eq!(pool.mixed_positions_without(1), 1);
        }
    }

    #[test]
    fn incremental_updates_match_rebuild() {
        let mut rng = RandomSource::new(4);
        let n = 70;
        let mut pool = Pool::new(n, Tracking::all());
        for i in 0..400 {
            if pool.len() < 3 || rng.coin() {
                // Small alphabet so species collide.
                let g = if i % 3 == 0 {
                    BitString::zeros(n)
                } else {
                    rng.bit_string(n)
                };
                pool.push(g, rng.below(5) as u64);
            } else {
                let idx = rng.below(pool.len());
                pool.swap_remove(idx);
            }
            assert!(pool.is_consistent());
            let sum: usize = pool.species.values().sum();
            assert_eq!(sum, pool.len());
        }
    }
}
