//! Uncoded BER sweeps.

use super::config::SimConfig;
use super::output::{CiBasis, SweepResult, SweepRow};
use super::stats::TrialOutcome;
use super::sweep::{run_point, Budget, StopOn};
use crate::detect::{detect, DetectorConfig};
use crate::model::{noise_variance_from_snr_db, random_bits, transmit, ChannelModel, Constellation};
use crate::rng::SimRng;
use crate::Result;

/// One channel use shared by every detector: the detectors see the same
/// channel, bits and noise.
pub fn ber_trial(
    model: &ChannelModel,
    constellation: &Constellation,
    noise_variance: f64,
    detectors: &[DetectorConfig],
    rng: &mut SimRng,
) -> Result<Vec<TrialOutcome>> {
    let channel = model.draw(noise_variance, rng);
    let (_, k) = model.dims();
    let bits = random_bits(k * constellation.bits_per_symbol(), rng);
    let frame = transmit(&bits, constellation, &channel, rng)?;
    detectors
        .iter()
        .map(|cfg| {
            let out = detect(&frame.received, &channel.h_hat, noise_variance, constellation, cfg)?;
            let errors = out.hard_bits.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
            Ok(TrialOutcome {
                bits: bits.len() as u64,
                bit_errors: errors,
                frame_error: errors > 0,
                iterations: out.iterations as u64,
                flops: out.flops,
            })
        })
        .collect()
}

pub(crate) fn series_name(base: &str, k: usize, multi: bool) -> String {
    if multi {
        format!("{base}:k={k}")
    } else {
        base.to_string()
    }
}

pub(crate) fn meta(cfg: &SimConfig) -> Vec<(String, String)> {
    let stop = match cfg.max_errors {
        Some(e) => format!("min({}-trials,{e}-errors)", cfg.trials),
        None => format!("{}-trials", cfg.trials),
    };
    vec![
        ("n".into(), cfg.n.to_string()),
        ("mod".into(), cfg.modulation.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        ("stop".into(), stop),
    ]
}

/// Simulated BER of every configured detector at every (K, SNR) point.
pub fn run_ber_sim(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let snrs = cfg.snr_points();
    let ks = cfg.user_counts();
    let detectors: Vec<DetectorConfig> = cfg.detector.iter().map(|&v| cfg.detector_config(v)).collect();
    let budget = Budget {
        trials: cfg.trials,
        max_errors: cfg.max_errors,
        stop_on: StopOn::BitErrors,
    };
    let mut rows = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        let model = ChannelModel::new(cfg.n, k, cfg.channel())?;
        let constellation = Constellation::for_users(cfg.modulation, k)?;
        let mut per_series: Vec<Vec<SweepRow>> = vec![Vec::new(); detectors.len()];
        for (si, &snr) in snrs.iter().enumerate() {
            let sigma2 = noise_variance_from_snr_db(snr);
            let point = (ki * snrs.len() + si) as u64;
            let tallies = run_point(cfg.seed, point, detectors.len(), budget, |rng| {
                ber_trial(&model, &constellation, sigma2, &detectors, rng)
            })?;
            for (d, (det, t)) in detectors.iter().zip(&tallies).enumerate() {
                let name = series_name(det.variant.name(), k, ks.len() > 1);
                per_series[d].push(SweepRow::from_tally(&name, snr, t, CiBasis::Bits));
            }
        }
        rows.extend(per_series.into_iter().flatten());
    }
    Ok(SweepResult {
        experiment: "ber-sim".into(),
        meta: meta(cfg),
        rows,
    })
}
