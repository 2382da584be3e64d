//! Polar transform `c = u·B·F^{⊗n}` with `B` the bit-reversal permutation.

use crate::{Error, Result};

/// Reverses the lowest `bits` bits of `i`.
pub fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Applies the bit-reversal permutation to a slice.
pub fn bit_reverse_permute<T: Copy>(values: &[T]) -> Vec<T> {
    let bits = values.len().trailing_zeros();
    (0..values.len()).map(|i| values[bit_reverse(i, bits)]).collect()
}

/// In-place `x ← x·F^{⊗n}` over GF(2).
pub fn butterfly(x: &mut [u8]) {
    let n = x.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for j in block..block + half {
                x[j] ^= x[j + half];
            }
        }
        half *= 2;
    }
}

/// Unchecked polar transform of an arbitrary input word.
pub fn transform(u: &[u8]) -> Vec<u8> {
    // B commutes with F^{⊗n}, so the permutation can follow the butterfly.
    let mut x = u.to_vec();
    butterfly(&mut x);
    bit_reverse_permute(&x)
}

/// Encodes `u`, which must carry zeros at every frozen position.
pub fn encode(u: &[u8], frozen: &[bool]) -> Result<Vec<u8>> {
    if u.len() != frozen.len() || !u.len().is_power_of_two() {
        return Err(Error::Shape(format!("input of {} bits for a code of length {}", u.len(), frozen.len())));
    }
    if let Some(pos) = u.iter().zip(frozen).position(|(b, f)| *f && *b != 0) {
        return Err(Error::NonzeroFrozen(pos));
    }
    Ok(transform(u))
}
