use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Measurement histogram keyed by basis index; bit 0 of the index is classical bit 0,
/// rendered as the rightmost character.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    n_bits: usize,
    counts: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn new(n_bits: usize) -> Counts {
        Counts { n_bits, counts: BTreeMap::new() }
    }

    /// Histogram from `(bitstring, count)` pairs, e.g. `[("00", 4096), ("11", 4096)]`.
    pub fn from_pairs(pairs: &[(&str, u64)]) -> Result<Counts> {
        let n_bits = pairs.first().map(|p| p.0.len()).ok_or(Error::EmptyHistogram)?;
        let mut c = Counts::new(n_bits);
        for (s, n) in pairs {
            if s.len() != n_bits {
                return Err(Error::LengthMismatch { expected: n_bits, got: s.len() });
            }
            c.add(parse_bitstring(s)?, *n);
        }
        Ok(c)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn add(&mut self, index: u64, n: u64) {
        if n > 0 {
            *self.counts.entry(index).or_insert(0) += n;
        }
    }

    pub fn get_index(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn get(&self, bits: &str) -> u64 {
        parse_bitstring(bits).map(|i| self.get_index(i)).unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn bitstring(&self, index: u64) -> String {
        (0..self.n_bits).rev().map(|b| if index >> b & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn to_string_map(&self) -> BTreeMap<String, u64> {
        self.iter().map(|(k, v)| (self.bitstring(k), v)).collect()
    }

    /// Most frequent outcome; ties go to the lowest index.
    pub fn mode(&self) -> Option<u64> {
        let mut best: Option<(u64, u64)> = None;
        for (k, v) in self.iter() {
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((k, v));
            }
        }
        best.map(|b| b.0)
    }

    pub fn frequency(&self, index: u64) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            self.get_index(index) as f64 / t as f64
        }
    }
}

impl Serialize for Counts {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string_map().serialize(s)
    }
}

pub fn parse_bitstring(s: &str) -> Result<u64> {
    let mut idx = 0u64;
    for ch in s.chars() {
        idx <<= 1;
        match ch {
            '0' => {}
            '1' => idx |= 1,
            _ => return Err(Error::InvalidArgument(format!("bad bitstring '{s}'"))),
        }
    }
    Ok(idx)
}
