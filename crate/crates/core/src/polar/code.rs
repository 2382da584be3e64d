//! Code construction: frozen set, CRC, interleaver.

use super::crc::Crc;
use super::encode::encode;
use super::ga::{subchannel_error_probabilities, BiasTable};
use super::interleave::Interleaver;
use crate::{Error, Result};

/// Where the frozen set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FrozenSource {
    /// Gaussian-approximation ranking at a BPSK-equivalent noise variance.
    Ga { design_variance: f64 },
    /// Reliability sequence of 0-based indices, most reliable first. Entries
    /// `≥ η` are skipped, so a longer nested sequence can be used directly.
    Reliability(Vec<usize>),
}

/// A CRC-aided polar code with its interleaver.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    eta: usize,
    kappa: usize,
    crc: Crc,
    frozen: Vec<bool>,
    info_positions: Vec<usize>,
    interleaver: Interleaver,
}

/// Builds a code of length `eta` with `kappa` unfrozen positions, of which the
/// last `crc.len()` carry parity.
pub fn construct_code(eta: usize, kappa: usize, crc: Crc, source: &FrozenSource, interleaver_seed: u64) -> Result<PolarCode> {
    if !eta.is_power_of_two() || eta < 2 {
        return Err(Error::CodeSpec(format!("length {eta} is not a power of two ≥ 2")));
    }
    if kappa > eta {
        return Err(Error::CodeSpec(format!("{kappa} information bits exceed length {eta}")));
    }
    if crc.len() > kappa {
        return Err(Error::CodeSpec(format!("CRC of {} bits does not fit in {kappa} information bits", crc.len())));
    }
    let order: Vec<usize> = match source {
        FrozenSource::Ga { design_variance } => {
            if !(design_variance.is_finite() && *design_variance > 0.0) {
                return Err(Error::CodeSpec(format!("design variance {design_variance} must be positive")));
            }
            let p = subchannel_error_probabilities(eta, *design_variance);
            let mut idx: Vec<usize> = (0..eta).collect();
            // Most reliable first; equal probabilities keep index order.
            idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
            idx
        }
        FrozenSource::Reliability(seq) => {
            let idx: Vec<usize> = seq.iter().copied().filter(|&i| i < eta).collect();
            let mut seen = vec![false; eta];
            for &i in &idx {
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::CodeSpec(format!("index {i} repeated in reliability sequence")));
                }
            }
            if idx.len() != eta {
                return Err(Error::CodeSpec(format!("reliability sequence covers {} of {eta} positions", idx.len())));
            }
            idx
        }
    };
    let mut frozen = vec![true; eta];
    for &i in &order[..kappa] {
        frozen[i] = false;
    }
    let info_positions = (0..eta).filter(|&i| !frozen[i]).collect();
    Ok(PolarCode {
        eta,
        kappa,
        crc,
        frozen,
        info_positions,
        interleaver: Interleaver::new(eta, interleaver_seed),
    })
}

impl PolarCode {
    pub fn len(&self) -> usize {
        self.eta
    }

    pub fn is_empty(&self) -> bool {
        self.eta == 0
    }

    /// Unfrozen positions, CRC included.
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Payload bits per codeword.
    pub fn payload_len(&self) -> usize {
        self.kappa - self.crc.len()
    }

    pub fn rate(&self) -> f64 {
        self.payload_len() as f64 / self.eta as f64
    }

    pub fn crc(&self) -> &Crc {
        &self.crc
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    /// Frozen positions in increasing order.
    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.eta).filter(|&i| self.frozen[i]).collect()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    /// Input word `u` carrying `payload ‖ crc(payload)` at the unfrozen positions.
    pub fn input_word(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.payload_len() {
            return Err(Error::Shape(format!("payload of {} bits, code expects {}", payload.len(), self.payload_len())));
        }
        let info = self.crc.attach(payload);
        let mut u = vec![0u8; self.eta];
        for (&pos, &b) in self.info_positions.iter().zip(&info) {
            u[pos] = b;
        }
        Ok(u)
    }

    /// Codeword before interleaving.
    pub fn encode_payload(&self, payload: &[u8]) -> Result<Vec<u8>> {
        encode(&self.input_word(payload)?, &self.frozen)
    }

    /// Unfrozen bits of an input word (payload followed by CRC).
    pub fn info_bits(&self, u: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&i| u[i]).collect()
    }

    /// Payload part of an input word.
    pub fn payload(&self, u: &[u8]) -> Vec<u8> {
        self.info_positions[..self.payload_len()].iter().map(|&i| u[i]).collect()
    }

    pub fn crc_passes(&self, u: &[u8]) -> bool {
        self.crc.check(&self.info_bits(u)).unwrap_or(false)
    }

    /// Bias table for a BPSK-equivalent channel noise variance `v`.
    pub fn bias_table(&self, v: f64) -> BiasTable {
        BiasTable::new(subchannel_error_probabilities(self.eta, v), &self.frozen)
    }
}
