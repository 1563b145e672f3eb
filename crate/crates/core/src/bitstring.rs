//! Fixed-length binary genotypes packed into 64-bit words.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in the
//! last word are always zero, so word-wise popcount and XOR never need masking.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        BitString { words, len }
    }

    /// Builds a string from raw words; bits beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        BitString { words, len }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        BitString { words, len }
    }

    /// String of length `len` whose zero bits sit exactly at `zero_positions`.
    pub fn with_zeros_at(len: usize, zero_positions: &[usize]) -> Self {
        let mut s = Self::ones(len);
        for &i in zero_positions {
            s.set(i, false);
        }
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Number of one-bits, `|x|_1`.
    #[inline]
    pub fn ones_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &BitString) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self.hamming_distance_unchecked(other))
    }

    /// Hamming distance for strings already known to share a length.
    #[inline]
    pub fn hamming_distance_unchecked(&self, other: &BitString) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> BitString {
        BitString::from_words(self.words.iter().map(|w| !w).collect(), self.len)
    }

    pub fn is_all_ones(&self) -> bool {
        self.ones_count() == self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions holding a zero bit, in increasing order.
    pub fn zero_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| !self.get(i)).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::Parse("empty bit string".into()));
        }
        Ok(BitString::from_bits(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn ones_count_examples() {
        assert_eq!(BitString::zeros(8).ones_count(), 0);
        assert_eq!(BitString::ones(8).ones_count(), 8);
        assert_eq!(bs("10110100").ones_count(), 4);
    }

    #[test]
    fn hamming_examples() {
        let x = bs("1011010011");
        assert_eq!(x.hamming_distance(&x).unwrap(), 0);
        assert_eq!(bs("0000").hamming_distance(&bs("1111")).unwrap(), 4);
        assert_eq!(bs("0011111111").hamming_distance(&bs("0101111111")).unwrap(), 2);
    }

    #[test]
    fn hamming_length_mismatch() {
        let err = bs("000").hamming_distance(&bs("0000")).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn textual_order_is_index_zero_first() {
        let mut x = BitString::zeros(5);
        x.set(0, true);
        assert_eq!(x.to_string(), "10000");
        assert!(bs("01").get(1));
    }

    #[test]
    fn ones_masks_tail_word() {
        for len in [1, 63, 64, 65, 130] {
            let x = BitString::ones(len);
            assert_eq!(x.ones_count(), len);
            assert_eq!(x.complement().ones_count(), 0);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("01x1".parse::<BitString>().is_err());
        assert!("".parse::<BitString>().is_err());
    }

    fn arb_bits(len: usize) -> impl Strategy<Value = BitString> {
        proptest::collection::vec(any::<bool>(), len).prop_map(BitString::from_bits)
    }

    fn arb_triple() -> impl Strategy<Value = (BitString, BitString, BitString)> {
        (1usize..200).prop_flat_map(|n| (arb_bits(n), arb_bits(n), arb_bits(n)))
    }

    proptest! {
        #[test]
        fn triangle_inequality((x, y, z) in arb_triple()) {
            let xz = x.hamming_distance(&z).unwrap();
            let xy = x.hamming_distance(&y).unwrap();
            let yz = y.hamming_distance(&z).unwrap();
            prop_assert!(xz <= xy + yz);
            prop_assert_eq!(xy, y.hamming_distance(&x).unwrap());
        }

        #[test]
        fn complement_partitions_length((x, _, _) in arb_triple()) {
            prop_assert_eq!(x.ones_count() + x.complement().ones_count(), x.len());
            prop_assert_eq!(x.hamming_distance(&x.complement()).unwrap(), x.len());
        }

        #[test]
        fn text_round_trip((x, _, _) in arb_triple()) {
            let back: BitString = x.to_string().parse().unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
