//! Seeded random interleaver between the encoder and the modulator.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::seeded;
use crate::{Error, Result};

/// A permutation `π` applied as `out[j] = in[π[j]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    /// Uniform permutation of `len` positions drawn from `seed`.
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut seeded(seed));
        Self::from_permutation(perm).expect("shuffle yields a permutation")
    }

    pub fn identity(len: usize) -> Self {
        Self::from_permutation((0..len).collect()).expect("identity is a permutation")
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut inverse = vec![usize::MAX; perm.len()];
        for (j, &p) in perm.iter().enumerate() {
            if p >= perm.len() || inverse[p] != usize::MAX {
                return Err(Error::InvalidParameter(format!("not a permutation: {perm:?}")));
            }
            inverse[p] = j;
        }
        Ok(Self { perm, inverse })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.perm.iter().map(|&p| input[p]).collect())
    }

    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.inverse.iter().map(|&j| input[j]).collect())
    }

    fn check(&self, len: usize) -> Result<()> {
        if len == self.perm.len() {
            Ok(())
        } else {
            Err(Error::Shape(format!("{len} values for an interleaver of length {}", self.perm.len())))
        }
    }
}
