//! Closed-form BER curves from the variance evolution, optionally overlaid
//! with simulation.

use super::ber::{ber_trial, meta, series_name};
use super::config::SimConfig;
use super::output::{CiBasis, SweepResult, SweepRow};
use super::sweep::{run_point, Budget, StopOn};
use crate::analysis::{run_evolution, Scheme};
use crate::model::{noise_variance_from_snr_db, ChannelModel, Constellation};
use crate::{Error, Result};

pub fn run_ber_approx(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let snrs = cfg.snr_points();
    let ks = cfg.user_counts();
    let multi = ks.len() > 1;
    let schemes: Vec<(String, Scheme)> = cfg
        .detector
        .iter()
        .map(|&v| {
            Scheme::try_from(v)
                .map(|s| (v.name().to_string(), s))
                .map_err(|_| Error::Config(format!("no closed-form evolution for detector {v}")))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        let constellation = Constellation::for_users(cfg.modulation, k)?;
        for (name, scheme) in &schemes {
            for &snr in &snrs {
                let evo = run_evolution(cfg.n, k, noise_variance_from_snr_db(snr), *scheme, &constellation, cfg.zeta)?;
                rows.push(SweepRow {
                    series: series_name(&format!("approx:{name}"), k, multi),
                    snr_db: snr,
                    trials: 0,
                    bit_errors: 0,
                    ber: evo.ber,
                    frame_errors: 0,
                    fer: 0.0,
                    avg_iterations: evo.iterations as f64,
                    avg_flops_add: 0.0,
                    avg_flops_cmp: 0.0,
                    avg_flops_mul: 0.0,
                    ci95_halfwidth: 0.0,
                });
            }
        }
        if cfg.overlay {
            let model = ChannelModel::new(cfg.n, k, cfg.channel())?;
            let detectors: Vec<_> = cfg.detector.iter().map(|&v| cfg.detector_config(v)).collect();
            let budget = Budget {
                trials: cfg.trials,
                max_errors: cfg.max_errors,
                stop_on: StopOn::BitErrors,
            };
            let mut sim: Vec<Vec<SweepRow>> = vec![Vec::new(); detectors.len()];
            for (si, &snr) in snrs.iter().enumerate() {
                let sigma2 = noise_variance_from_snr_db(snr);
                let point = (ki * snrs.len() + si) as u64;
                let tallies = run_point(cfg.seed, point, detectors.len(), budget, |rng| {
                    ber_trial(&model, &constellation, sigma2, &detectors, rng)
                })?;
                for (d, t) in tallies.iter().enumerate() {
                    let name = series_name(&format!("sim:{}", detectors[d].variant), k, multi);
                    sim[d].push(SweepRow::from_tally(&name, snr, t, CiBasis::Bits));
                }
            }
            rows.extend(sim.into_iter().flatten());
        }
    }
    Ok(SweepResult {
        experiment: "ber-approx".into(),
        meta: meta(cfg),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ber_from_variance;
    use crate::detect::Variant;

    #[test]
    fn increases_with_load() {
        let cfg = SimConfig {
            n: 1024,
            alpha: vec![0.1, 0.2, 0.3, 0.4],
            snr: vec![0.0, 7.0, 10.0],
            ..Default::default()
        };
        let res = run_ber_approx(&cfg).unwrap();
        for snr in [0.0, 7.0, 10.0] {
            let curve: Vec<f64> = res.rows.iter().filter(|r| r.snr_db == snr).map(|r| r.ber).collect();
            assert_eq!(curve.len(), 4);
            assert!(curve.windows(2).all(|w| w[0] <= w[1]), "{snr}: {curve:?}");
        }
    }

    #[test]
    fn single_user_limit_is_matched_filter() {
        let cfg = SimConfig { n: 64, k: 1, snr: vec![-5.0, 0.0], ..Default::default() };
        let res = run_ber_approx(&cfg).unwrap();
        for r in &res.rows {
            // One user sees only noise: v = σ²/N in units of E_s = 1.
            let v = noise_variance_from_snr_db(r.snr_db) / 64.0;
            assert!((r.ber - ber_from_variance(2.0 * v, 4)).abs() < 1e-12 * r.ber.max(1e-300));
        }
    }

    #[test]
    fn rejects_detectors_without_evolution() {
        let cfg = SimConfig { detector: vec![Variant::Mmse], ..Default::default() };
        assert!(matches!(run_ber_approx(&cfg), Err(Error::Config(_))));
    }
}
