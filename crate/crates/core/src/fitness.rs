//! The Jump_k objective and the OneMax slope used by engine tests.

use crate::bitstring::BitString;
use crate::error::{invalid, Error, Result};

/// A pseudo-Boolean objective to be maximized.
pub trait Objective: Send + Sync {
    fn n(&self) -> usize;

    /// Fitness as a function of the number of one-bits.
    fn value_of_ones(&self, ones: usize) -> u64;

    fn optimum_value(&self) -> u64;

    /// True once `ones` lies on the terminal level of the landscape (the
    /// plateau or the optimum for Jump_k, the optimum for OneMax).
    fn is_settled(&self, ones: usize) -> bool;

    fn evaluate(&self, x: &BitString) -> Result<u64> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.n(),
            });
        }
        Ok(self.value_of_ones(x.ones_count()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Slope,
    Plateau,
    Gap,
    Optimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpK {
    n: usize,
    k: usize,
}

impl JumpK {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("Jump_k requires n >= 1"));
        }
        if k == 0 || k > n {
            return Err(invalid(format!("Jump_k requires 1 <= k <= n, got k={k}, n={n}")));
        }
        Ok(JumpK { n, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Fitness shared by every plateau point.
    pub fn plateau_value(&self) -> u64 {
        self.n as u64
    }

    pub fn classify_ones(&self, ones: usize) -> PointClass {
        let edge = self.n - self.k;
        if ones == self.n {
            PointClass::Optimum
        } else if ones < edge {
            PointClass::Slope
        } else if ones == edge {
            PointClass::Plateau
        } else {
            PointClass::Gap
        }
    }

    pub fn classify(&self, x: &BitString) -> Result<PointClass> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.n,
            });
        }
        Ok(self.classify_ones(x.ones_count()))
    }
}

impl Objective for JumpK {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn value_of_ones(&self, ones: usize) -> u64 {
        if ones == self.n || ones <= self.n - self.k {
            (self.k + ones) as u64
        } else {
            (self.n - ones) as u64
        }
    }

    fn optimum_value(&self) -> u64 {
        (self.n + self.k) as u64
    }

    fn is_settled(&self, ones: usize) -> bool {
        ones == self.n || ones == self.n - self.k
    }
}

/// `|x|_1`, the slope-only landscape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneMax {
    pub n: usize,
}

impl Objective for OneMax {
    fn n(&self) -> usize {
        self.n
    }

    fn value_of_ones(&self, ones: usize) -> u64 {
        ones as u64
    }

    fn optimum_value(&self) -> u64 {
        self.n as u64
    }

    fn is_settled(&self, ones: usize) -> bool {
        ones == self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_ones(n: usize, ones: usize) -> BitString {
        BitString::from_bits((0..n).map(|i| i < ones))
    }

    #[test]
    fn evaluate_examples() {
        let f = JumpK::new(10, 3).unwrap();
        assert_eq!(f.evaluate(&BitString::ones(10)).unwrap(), 13);
        assert_eq!(f.evaluate(&with_ones(10, 7)).unwrap(), 10);
        assert_eq!(f.evaluate(&with_ones(10, 9)).unwrap(), 1);
    }

    #[test]
    fn classify_examples() {
        let f = JumpK::new(10, 3).unwrap();
        assert_eq!(f.classify(&with_ones(10, 7)).unwrap(), PointClass::Plateau);
        assert_eq!(f.classify(&with_ones(10, 10)).unwrap(), PointClass::Optimum);
        assert_eq!(f.classify(&with_ones(10, 8)).unwrap(), PointClass::Gap);
        assert_eq!(f.classify(&with_ones(10, 2)).unwrap(), PointClass::Slope);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(JumpK::new(10, 0).is_err());
        assert!(JumpK::new(10, 11).is_err());
        assert!(JumpK::new(10, 10).is_ok());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let f = JumpK::new(10, 3).unwrap();
        assert!(f.evaluate(&BitString::ones(9)).is_err());
    }

    /// Brute force over every string for small n: gap below plateau, optimum
    /// unique and above everything, slope strictly increasing.
    #[test]
    fn exhaustive_landscape_shape() {
        for n in 1..=12usize {
            for k in 1..=n {
                let f = JumpK::new(n, k).unwrap();
                let mut plateau_min = u64::MAX;
                let mut gap_max = 0u64;
                let mut best = 0u64;
                let mut best_count = 0;
                let mut by_ones = vec![None; n + 1];
                for mask in 0u64..(1 << n) {
                    let x = BitString::from_words(vec![mask], n);
                    let v = f.evaluate(&x).unwrap();
                    assert!(v <= (n + k) as u64);
                    let ones = x.ones_count();
                    match by_ones[ones] {
                        None => by_ones[ones] = Some(v),
                        Some(prev) => assert_eq!(prev, v),
                    }
                    match f.classify(&x).unwrap() {
                        PointClass::Plateau => {
                            plateau_min = plateau_min.min(v);
                            assert_eq!(v, n as u64);
                        }
                        PointClass::Gap => gap_max = gap_max.max(v),
                        _ => {}
                    }
                    if v > best {
                        best = v;
                        best_count = 1;
                    } else if v == best {
                        best_count += 1;
                    }
                }
                assert_eq!(best, (n + k) as u64);
                assert_eq!(best_count, 1);
                if k >= 2 {
                    assert!(gap_max < plateau_min, "n={n} k={k}");
                }
                let slope: Vec<u64> = by_ones[..=n - k].iter().map(|v| v.unwrap()).collect();
                assert!(slope.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn onemax_is_popcount() {
        let f = OneMax { n: 6 };
        assert_eq!(f.evaluate(&with_ones(6, 4)).unwrap(), 4);
        assert!(f.is_settled(6));
        assert!(!f.is_settled(5));
    }
}
