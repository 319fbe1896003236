use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Selection of an ensemble out of a pool: bit `i` set means pool member
/// `i` votes. One individual of the evolutionary search.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "MaskRepr", try_from = "MaskRepr")]
pub struct EnsembleMask {
    bits: Vec<bool>,
}

impl EnsembleMask {
    pub fn empty(len: usize) -> Self {
        Self { bits: alloc::vec![false; len] }
    }

    pub fn full(len: usize) -> Self {
        Self { bits: alloc::vec![true; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_indices(len: usize, active: &[usize]) -> Self {
        let mut m = Self::empty(len);
        for &i in active {
            m.bits[i] = true;
        }
        m
    }

    /// Parses a string of '0'/'1' characters, e.g. `"11001"`.
    pub fn parse_binary(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::from_bits)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn active(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    /// Sets `fallback` when no bit is set. Returns whether a repair happened.
    pub fn repair(&mut self, fallback: usize) -> bool {
        if self.bits.iter().any(|&b| b) {
            false
        } else {
            self.bits[fallback] = true;
            true
        }
    }

    /// Big-endian hex rendering: bit 0 is the most significant bit of the
    /// first nibble; the tail is zero-padded to a whole nibble.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        self.bits
            .chunks(4)
            .map(|chunk| {
                let v = chunk.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (u8::from(b) << (3 - k)));
                DIGITS[v as usize] as char
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Option<Self> {
        if hex.len() != len.div_ceil(4) {
            return None;
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let v = c.to_digit(16)?;
            for k in 0..4 {
                bits.push(v & (1 << (3 - k)) != 0);
            }
        }
        if bits[len..].iter().any(|&b| b) {
            return None;
        }
        bits.truncate(len);
        Some(Self { bits })
    }

    /// Deterministic tie-break order: lexicographic over bits, `0 < 1`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.bits.cmp(&other.bits)
    }
}

/// Serialized form: pool length plus hex bit-string.
#[derive(Serialize, Deserialize)]
struct MaskRepr {
    len: usize,
    hex: String,
}

impl From<EnsembleMask> for MaskRepr {
    fn from(m: EnsembleMask) -> Self {
        Self { len: m.len(), hex: m.to_hex() }
    }
}

impl TryFrom<MaskRepr> for EnsembleMask {
    type Error = String;

    fn try_from(r: MaskRepr) -> core::result::Result<Self, String> {
        EnsembleMask::from_hex(&r.hex, r.len).ok_or_else(|| alloc::format!("invalid mask hex {:?} for length {}", r.hex, r.len))
    }
}

impl fmt::Debug for EnsembleMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EnsembleMask(")?;
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let m = EnsembleMask::parse_binary("110010101").unwrap();
        assert_eq!(m.to_hex(), "ca8");
        assert_eq!(EnsembleMask::from_hex("ca8", 9), Some(m));
        assert_eq!(EnsembleMask::from_hex("ca9", 9), None);
    }

    #[test]
    fn repair_sets_fallback_only_when_empty() {
        let mut m = EnsembleMask::empty(4);
        assert!(m.repair(2));
        assert_eq!(m.active(), alloc::vec![2]);
        assert!(!m.repair(0));
        assert_eq!(m.count_ones(), 1);
    }
}
