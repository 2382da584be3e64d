use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChannelRealization, Constellation};
use crate::{CVector, Error, Result, C64};

/// Noise variance for an SNR in dB under unit total transmit energy.
pub fn noise_variance_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// One uncoded channel use: the K·m bits (user-major), the K symbols and the
/// N received samples.
#[derive(Debug, Clone)]
pub struct TransmitFrame {
    pub bits: Vec<u8>,
    pub symbols: CVector,
    pub labels: Vec<usize>,
    pub received: CVector,
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

/// Modulates `bits` (K rows of m bits, concatenated) and passes the symbols
/// through the true channel with complex AWGN of variance `noise_variance`.
pub fn transmit<R: Rng + ?Sized>(
    bits: &[u8],
    constellation: &Constellation,
    channel: &ChannelRealization,
    rng: &mut R,
) -> Result<TransmitFrame> {
    let m = constellation.bits_per_symbol();
    let k = channel.users();
    if bits.len() != k * m {
        return Err(Error::Shape(format!("expected {} bits for {k} users, got {}", k * m, bits.len())));
    }
    let labels: Vec<usize> = bits.chunks(m).map(|b| constellation.label_from_bits(b)).collect();
    let symbols = CVector::from_iterator(k, labels.iter().map(|&l| constellation.point(l)));
    let mut received = &channel.h * &symbols;
    let sd = (channel.noise_variance / 2.0).sqrt();
    if sd > 0.0 {
        for y in received.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *y += C64::new(sd * re, sd * im);
        }
    }
    Ok(TransmitFrame {
        bits: bits.to_vec(),
        symbols,
        labels,
        received,
    })
}
