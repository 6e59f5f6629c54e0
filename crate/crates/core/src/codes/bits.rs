use std::fmt;

use crate::error::{Error, Result};

/// Fixed-length bit vector packed into 64-bit words, bit `j` of the vector
/// at bit `j % 64` of word `j / 64`. Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut row = Self::zeros(len);
        for j in 0..len {
            row.set(j, true);
        }
        row
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            row.set(j, b);
        }
        row
    }

    /// Parse a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(Self::from_bits(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j >> 6] >> (j & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "bit index {j} out of range {}", self.len);
        let mask = 1u64 << (j & 63);
        if value {
            self.words[j >> 6] |= mask;
        } else {
            self.words[j >> 6] &= !mask;
        }
    }

    pub fn flip(&mut self, j: usize) {
        let v = self.get(j);
        self.set(j, !v);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn xor(&self, other: &BitRow) -> Result<BitRow> {
        if self.len != other.len {
            return Err(Error::invalid(format!(
                "bit-vector length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        Ok(BitRow {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Distance without the length check; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &BitRow) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.iter().map(|b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow({self})")
    }
}

/// Number of positions in which `a` and `b` differ.
pub fn hamming_distance(a: &BitRow, b: &BitRow) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "hamming distance of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.distance_unchecked(b))
}
