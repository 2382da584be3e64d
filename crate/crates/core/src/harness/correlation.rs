//! Correlation between the symbol estimates of consecutive iterations.

use rayon::prelude::*;

use super::config::SimConfig;
use super::output::CorrelationRow;
use super::stats::Moments;
use super::sweep::BATCH;
use crate::detect::{detect, Variant};
use crate::model::{noise_variance_from_snr_db, random_bits, transmit, ChannelModel, Constellation};
use crate::rng::trial_rng;
use crate::{Error, Result};

/// For each `t ≥ 2`, pooled Pearson correlation over trials, users and the
/// real/imaginary parts between `x̂^(t)` and `x̂^(t−1)`, and between the
/// corresponding estimation errors `x̂ − x`. Trials that stopped before `t`
/// do not contribute to that row.
pub fn run_correlation(cfg: &SimConfig) -> Result<Vec<CorrelationRow>> {
    cfg.validate()?;
    let variant = cfg.detector[0];
    if !matches!(variant, Variant::BPicDsc | Variant::IbPicDsc | Variant::PicDsc) {
        return Err(Error::Config(format!("correlation needs an iterative detector, got {variant}")));
    }
    let mut det = cfg.detector_config(variant);
    det.trace = true;
    let t_max = det.t_max;
    let k = cfg.k;
    let model = ChannelModel::new(cfg.n, k, cfg.channel())?;
    let constellation = Constellation::for_users(cfg.modulation, k)?;
    let mut rows = Vec::new();
    for (si, snr) in cfg.snr_points().into_iter().enumerate() {
        let sigma2 = noise_variance_from_snr_db(snr);
        let mut est = vec![Moments::default(); t_max + 1];
        let mut err = vec![Moments::default(); t_max + 1];
        let mut start = 0;
        while start < cfg.trials {
            let end = (start + BATCH).min(cfg.trials);
            let batch: Vec<(Vec<Moments>, Vec<Moments>)> = (start..end)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(cfg.seed, si as u64, trial);
                    let channel = model.draw(sigma2, &mut rng);
                    let bits = random_bits(k * constellation.bits_per_symbol(), &mut rng);
                    let frame = transmit(&bits, &constellation, &channel, &mut rng)?;
                    let out = detect(&frame.received, &channel.h_hat, sigma2, &constellation, &det)?;
                    let mut e = vec![Moments::default(); t_max + 1];
                    let mut d = vec![Moments::default(); t_max + 1];
                    for pair in out.trace.windows(2) {
                        let t = pair[1].iteration;
                        for u in 0..k {
                            let (a, b, x) = (pair[1].x_hat[u], pair[0].x_hat[u], frame.symbols[u]);
                            e[t].push(a.re, b.re);
                            e[t].push(a.im, b.im);
                            d[t].push(a.re - x.re, b.re - x.re);
                            d[t].push(a.im - x.im, b.im - x.im);
                        }
                    }
                    Ok((e, d))
                })
                .collect::<Result<_>>()?;
            for (e, d) in &batch {
                for t in 0..=t_max {
                    est[t].merge(&e[t]);
                    err[t].merge(&d[t]);
                }
            }
            start = end;
        }
        for t in 2..=t_max {
            rows.push(CorrelationRow {
                series: variant.name().to_string(),
                snr_db: snr,
                t,
                pairs: est[t].count,
                corr_estimates: est[t].correlation(),
                corr_errors: err[t].correlation(),
            });
        }
    }
    Ok(rows)
}
