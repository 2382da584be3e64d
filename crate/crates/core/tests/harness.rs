use mimorx::detect::Variant;
use mimorx::harness::{run, CodedLink, Experiment, Report, SimConfig, SweepResult};
use mimorx::polar::Interleaver;
use mimorx::rng::trial_rng;
use mimorx::C64;

fn sweep(cfg: &SimConfig) -> SweepResult {
    match run(cfg).unwrap() {
        Report::Sweep(s) => s,
        other => panic!("expected a sweep, got {other:?}"),
    }
}

#[test]
fn interleaver_matches_golden_permutation() {
    let text = include_str!("golden/interleaver_eta4_seed0.txt");
    let golden: Vec<usize> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(Interleaver::new(4, 0).permutation(), golden.as_slice());
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = SimConfig {
        experiment: Experiment::BerSim,
        n: 16,
        k: 4,
        detector: vec![Variant::BPicDsc, Variant::IbPicDsc, Variant::Ml],
        snr: vec![0.0, 6.0],
        trials: 500,
        max_errors: Some(25),
        ..Default::default()
    };
    let one = run(&SimConfig { threads: Some(1), ..cfg.clone() }).unwrap().to_csv_string().unwrap();
    let three = run(&SimConfig { threads: Some(3), ..cfg }).unwrap().to_csv_string().unwrap();
    assert_eq!(one, three);
}

#[test]
fn early_stopping_does_not_bias_the_estimate() {
    let base = SimConfig {
        experiment: Experiment::BerSim,
        n: 16,
        k: 8,
        detector: vec![Variant::BPicDsc],
        snr: vec![4.0],
        trials: 20_000,
        ..Default::default()
    };
    let full = sweep(&SimConfig { max_errors: None, seed: 1, ..base.clone() });
    let early = sweep(&SimConfig { max_errors: Some(100), seed: 2, ..base });
    let (f, e) = (&full.rows[0], &early.rows[0]);
    assert!(e.trials < f.trials, "early stop never triggered");
    assert!(e.bit_errors >= 100);
    assert!(
        (f.ber - e.ber).abs() <= f.ci95_halfwidth + e.ci95_halfwidth,
        "full {} ± {}, early {} ± {}",
        f.ber,
        f.ci95_halfwidth,
        e.ber,
        e.ci95_halfwidth
    );
}

#[test]
fn coded_slots_see_independent_channels() {
    let cfg = SimConfig {
        experiment: Experiment::FerSim,
        n: 64,
        k: 16,
        snr: vec![0.0],
        ..Default::default()
    };
    let link = CodedLink::new(&cfg, 0.0).unwrap();
    let slots = link.slots();
    assert_eq!(slots, 8);
    let frames = 2000;
    let gains: Vec<Vec<C64>> = (0..frames).map(|t| link.frame(&mut trial_rng(3, 0, t)).unwrap().slot_gains).collect();
    // Complex correlation of the first channel tap between every slot pair.
    let bound = 4.0 / (frames as f64).sqrt();
    for a in 0..slots {
        for b in a + 1..slots {
            let (mut cross, mut pa, mut pb) = (C64::new(0.0, 0.0), 0.0, 0.0);
            for g in &gains {
                cross += g[a] * g[b].conj();
                pa += g[a].norm_sqr();
                pb += g[b].norm_sqr();
            }
            let rho = cross.norm() / (pa * pb).sqrt();
            assert!(rho < bound, "slots {a} and {b}: |rho| = {rho}");
        }
    }
}

#[test]
fn iterate_errors_decorrelate_early_and_lock_in_late() {
    let cfg = SimConfig {
        experiment: Experiment::Correlation,
        n: 144,
        k: 48,
        snr: vec![10.0],
        trials: 400,
        ..Default::default()
    };
    let rows = match run(&cfg).unwrap() {
        Report::Correlation(rows) => rows,
        other => panic!("expected correlation rows, got {other:?}"),
    };
    for r in rows.iter().filter(|r| r.pairs > 1000) {
        let c = r.corr_errors.unwrap();
        if r.t < 4 {
            assert!(c < 0.5, "t={} corr={c}", r.t);
        } else {
            assert!(c > 0.9, "t={} corr={c}", r.t);
        }
    }
    // Trials stop by t = 6, leaving later rows empty rather than NaN.
    let last = rows.last().unwrap();
    assert_eq!(last.pairs, 0);
    assert_eq!(last.corr_errors, None);
}
