//! Polar-coded frame-error sweeps: encode, interleave, detect slot by slot,
//! demap, deinterleave and decode with SC, SCS and the sequential decoder.

use super::ber::meta;
use super::config::SimConfig;
use super::output::{CiBasis, SweepResult, SweepRow};
use super::stats::TrialOutcome;
use super::sweep::{run_point, Budget, StopOn};
use crate::analysis::{run_evolution, Scheme};
use crate::detect::{detect, DetectorConfig, DetectionResult};
use crate::model::{noise_variance_from_snr_db, random_bits, transmit, ChannelModel, Constellation};
use crate::polar::{decode_sc, decode_scs, decode_sequential, demap_llr, BiasTable, DecodeOutput, PolarCode};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Decoders run on every frame, in series order.
pub const DECODERS: [&str; 3] = ["seq", "scs", "sc"];

/// Everything needed to push one coded frame through the link.
#[derive(Debug, Clone)]
pub struct CodedLink {
    pub code: PolarCode,
    pub bias: BiasTable,
    pub model: ChannelModel,
    pub constellation: Constellation,
    pub detector: DetectorConfig,
    pub noise_variance: f64,
    pub list_size: usize,
}

/// Per-frame record kept alongside the tallies, for slot-level checks.
#[derive(Debug, Clone)]
pub struct FrameRecord {
    pub payload: Vec<u8>,
    pub llr: Vec<f64>,
    pub decoded: Vec<DecodeOutput>,
    pub detections: Vec<DetectionResult>,
    /// First channel coefficient of every slot.
    pub slot_gains: Vec<crate::C64>,
}

/// BPSK-equivalent variance of an axis bit for an E_s-normalised
/// interference-plus-noise variance `v`.
pub fn bpsk_equivalent_variance(v: f64, constellation: &Constellation) -> f64 {
    let a = constellation.half_spacing();
    v * constellation.energy() / (2.0 * a * a)
}

impl CodedLink {
    /// Builds the link for one SNR point; the GA design variance and the bias
    /// table both come from the evolution's fixed point `v^(T)`.
    pub fn new(cfg: &SimConfig, snr_db: f64) -> Result<Self> {
        let detector = cfg.detector_config(cfg.detector[0]);
        let scheme = Scheme::try_from(detector.variant)
            .map_err(|_| Error::Config(format!("fer-sim needs a PIC-DSC detector for the bias table, got {}", detector.variant)))?;
        let constellation = Constellation::for_users(cfg.modulation, cfg.k)?;
        let noise_variance = noise_variance_from_snr_db(snr_db);
        let evo = run_evolution(cfg.n, cfg.k, noise_variance, scheme, &constellation, cfg.zeta)?;
        let v_b = bpsk_equivalent_variance(evo.v, &constellation);
        let spec = cfg.code_spec()?;
        cfg.slots(&spec)?;
        let code = spec.build(v_b)?;
        let bias = code.bias_table(v_b);
        Ok(Self {
            code,
            bias,
            model: ChannelModel::new(cfg.n, cfg.k, cfg.channel())?,
            constellation,
            detector,
            noise_variance,
            list_size: cfg.list_size,
        })
    }

    pub fn slots(&self) -> usize {
        self.code.len() / (self.constellation.bits_per_symbol() * self.model.dims().1)
    }

    /// Sends one random payload and decodes it with every decoder.
    pub fn frame(&self, rng: &mut SimRng) -> Result<FrameRecord> {
        let payload = random_bits(self.code.payload_len(), rng);
        let codeword = self.code.encode_payload(&payload)?;
        let sent = self.code.interleaver().interleave(&codeword)?;
        let per_slot = sent.len() / self.slots();
        let mut llr_sent = Vec::with_capacity(sent.len());
        let mut detections = Vec::with_capacity(self.slots());
        let mut slot_gains = Vec::with_capacity(self.slots());
        for bits in sent.chunks(per_slot) {
            let channel = self.model.draw(self.noise_variance, rng);
            slot_gains.push(channel.h[(0, 0)]);
            let frame = transmit(bits, &self.constellation, &channel, rng)?;
            let det = detect(&frame.received, &channel.h_hat, self.noise_variance, &self.constellation, &self.detector)?;
            llr_sent.extend(demap_llr(det.soft_symbols.as_slice(), &det.soft_variances, &self.constellation));
            detections.push(det);
        }
        let llr = self.code.interleaver().deinterleave(&llr_sent)?;
        let decoded = vec![
            decode_sequential(&llr, &self.code, &self.bias, self.list_size)?,
            decode_scs(&llr, &self.code, self.list_size)?,
            decode_sc(&llr, &self.code)?,
        ];
        Ok(FrameRecord {
            payload,
            llr,
            decoded,
            detections,
            slot_gains,
        })
    }

    pub fn trial(&self, rng: &mut SimRng) -> Result<Vec<TrialOutcome>> {
        let rec = self.frame(rng)?;
        Ok(rec
            .decoded
            .iter()
            .map(|d| {
                let got = self.code.payload(&d.u);
                let errors = got.iter().zip(&rec.payload).filter(|(a, b)| a != b).count() as u64;
                TrialOutcome {
                    bits: rec.payload.len() as u64,
                    bit_errors: errors,
                    frame_error: errors > 0,
                    iterations: d.stats.iterations,
                    flops: d.stats.flops,
                }
            })
            .collect())
    }
}

pub fn run_fer_sim(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let snrs = cfg.snr_points();
    let budget = Budget {
        trials: cfg.trials,
        max_errors: cfg.max_errors,
        stop_on: StopOn::FrameErrors,
    };
    let prefix = cfg.detector[0].name();
    let mut per_series: Vec<Vec<SweepRow>> = vec![Vec::new(); DECODERS.len()];
    let mut extra = Vec::new();
    for (si, &snr) in snrs.iter().enumerate() {
        let link = CodedLink::new(cfg, snr)?;
        if si == 0 {
            extra.push(("code".to_string(), format!("{}/{}", link.code.len(), link.code.kappa())));
            extra.push(("crc".to_string(), link.code.crc().len().to_string()));
            extra.push(("list".to_string(), cfg.list_size.to_string()));
            extra.push(("slots".to_string(), link.slots().to_string()));
        }
        let tallies = run_point(cfg.seed, si as u64, DECODERS.len(), budget, |rng| link.trial(rng))?;
        for (d, t) in tallies.iter().enumerate() {
            per_series[d].push(SweepRow::from_tally(&format!("{prefix}+{}", DECODERS[d]), snr, t, CiBasis::Frames));
        }
    }
    let mut m = meta(cfg);
    m.push(("k".into(), cfg.k.to_string()));
    m.extend(extra);
    Ok(SweepResult {
        experiment: "fer-sim".into(),
        meta: m,
        rows: per_series.into_iter().flatten().collect(),
    })
}
