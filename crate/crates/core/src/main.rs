use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mimorx::detect::Variant;
use mimorx::harness::{run, Experiment, SimConfig};
use mimorx::Error;

/// Massive-MIMO link simulator.
///
/// Flags override the values of `--config`; unset values fall back to the
/// built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "mimorx", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON file with any of the fields below (same names, `mod` for --mod).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Receive antennas.
    #[arg(long)]
    n: Option<usize>,
    /// Users.
    #[arg(long)]
    k: Option<usize>,
    /// User loads K/N; each entry replaces --k.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    /// QAM order: 4, 16 or 64.
    #[arg(long = "mod")]
    modulation: Option<usize>,
    /// Detectors, comma separated: b-pic-dsc, ib-pic-dsc, pic-dsc, mmse, mf, ml.
    #[arg(long, value_delimiter = ',')]
    detector: Option<Vec<String>>,
    /// SNR points in dB: a comma-separated list whose items may be ranges
    /// `start:step:stop`.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Trial cap per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    /// Error events that end a point early; 0 runs the full budget.
    #[arg(long)]
    max_errors: Option<u64>,
    /// Base seed; each trial draws from its own stream derived from it
    #[arg(long)]
    seed: Option<u64>,
    /// Receive correlation coefficient.
    #[arg(long)]
    psi: Option<f64>,
    /// Rician factor.
    #[arg(long)]
    phi: Option<f64>,
    /// Channel-estimation error magnitude.
    #[arg(long)]
    gamma: Option<f64>,
    /// Maximum detector iterations
    #[arg(long)]
    tmax: Option<usize>,
    /// Convergence threshold on the change between iterates
    #[arg(long)]
    zeta: Option<f64>,
    /// Use the full residual-interference variance in the PIC observation.
    #[arg(long)]
    exact_sigma: bool,
    /// Polar code JSON (fer-sim).
    #[arg(long)]
    code_spec: Option<PathBuf>,
    /// Stack list size L (fer-sim).
    #[arg(long)]
    list_size: Option<usize>,
    /// Also simulate the ber-approx grid.
    #[arg(long)]
    overlay: bool,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    threads: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_snr(text: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Config(format!("bad SNR list `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let mut out = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, s, b] => {
                let (a, s, b) = (num(a)?, num(s)?, num(b)?);
                if s.is_nan() || s <= 0.0 || b < a {
                    return Err(bad());
                }
                let steps = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=steps).map(|i| a + i as f64 * s));
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

fn build_config(cli: Cli) -> Result<SimConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::from_json_file(path)?,
        None => SimConfig::default(),
    };
    cfg.experiment = cli.experiment;
    macro_rules! set {
        ($($field:ident => $target:ident),*) => {
            $(if let Some(v) = cli.$field { cfg.$target = v; })*
        };
    }
    set!(n => n, k => k, alpha => alpha, modulation => modulation, trials => trials, seed => seed,
         psi => psi, phi => phi, gamma => gamma, zeta => zeta, list_size => list_size);
    if let Some(t) = cli.tmax {
        cfg.tmax = Some(t);
    }
    if let Some(e) = cli.max_errors {
        cfg.max_errors = (e > 0).then_some(e);
    }
    if let Some(d) = cli.detector {
        cfg.detector = d.iter().map(|s| s.parse::<Variant>()).collect::<Result<_, _>>()?;
    }
    if let Some(s) = cli.snr {
        cfg.snr = parse_snr(&s)?;
    }
    if cli.code_spec.is_some() {
        cfg.code_spec = cli.code_spec;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    cfg.exact_sigma |= cli.exact_sigma;
    cfg.overlay |= cli.overlay;
    cfg.validate()?;
    Ok(cfg)
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::UnknownDetector(_)
            | Error::UnsupportedOrder(_)
            | Error::CodeSpec(_)
            | Error::Json(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| run(&cfg)?.write_to(cfg.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mimorx: {e}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
