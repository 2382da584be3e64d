//! Systematic CRC over GF(2) with a configurable generator.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// CRC generator of degree `len`. `poly` holds the coefficients below the
/// leading term, bit `i` for `D^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crc {
    len: usize,
    poly: u64,
}

impl Crc {
    /// Length-11 uplink generator D^11 + D^10 + D^9 + D^5 + 1.
    pub const CRC11: Crc = Crc { len: 11, poly: 0x621 };

    /// No CRC: `attach` is the identity and every word passes.
    pub fn none() -> Self {
        Self { len: 0, poly: 0 }
    }

    /// Accepts the generator with or without its leading `D^len` term.
    pub fn new(len: usize, poly: u64) -> Result<Self> {
        if len == 0 || len > 63 {
            return Err(Error::CodeSpec(format!("CRC length {len} outside 1..=63")));
        }
        let top = 1u64 << len;
        let poly = if poly & top != 0 { poly ^ top } else { poly };
        if poly >= top {
            return Err(Error::CodeSpec(format!("generator {poly:#x} has degree above {len}")));
        }
        if poly & 1 == 0 {
            return Err(Error::CodeSpec(format!("generator {poly:#x} lacks a constant term")));
        }
        Ok(Self { len, poly })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Generator including the leading term.
    pub fn full_poly(&self) -> u64 {
        self.poly | (1 << self.len)
    }

    /// Remainder of `bits(D)·D^len` modulo the generator, MSB first.
    fn remainder(&self, bits: &[u8]) -> u64 {
        if self.len == 0 {
            return 0;
        }
        let mask = (1u64 << self.len) - 1;
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg >> (self.len - 1)) & 1) ^ (b as u64 & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.poly;
            }
        }
        reg
    }

    /// Parity bits for `message`, MSB first.
    pub fn parity(&self, message: &[u8]) -> Vec<u8> {
        let r = self.remainder(message);
        (0..self.len).rev().map(|i| ((r >> i) & 1) as u8).collect()
    }

    /// `message` followed by its parity bits.
    pub fn attach(&self, message: &[u8]) -> Vec<u8> {
        let mut out = message.to_vec();
        out.extend(self.parity(message));
        out
    }

    /// True when `word` (message plus parity) divides by the generator.
    pub fn check(&self, word: &[u8]) -> Result<bool> {
        if word.len() < self.len {
            return Err(Error::Shape(format!("{} bits cannot carry a {}-bit CRC", word.len(), self.len)));
        }
        let (msg, parity) = word.split_at(word.len() - self.len);
        Ok(self.parity(msg) == parity)
    }
}
