//! Experiment configuration shared by the CLI and JSON config files.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::detect::{DetectorConfig, Variant};
use crate::model::ChannelParams;
use crate::polar::CodeSpecFile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BerSim,
    BerApprox,
    FerSim,
    Complexity,
    Correlation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BerSim => "ber-sim",
            Experiment::BerApprox => "ber-approx",
            Experiment::FerSim => "fer-sim",
            Experiment::Complexity => "complexity",
            Experiment::Correlation => "correlation",
        }
    }
}

/// Default trial cap per SNR point.
pub const DEFAULT_TRIALS: u64 = 1_000_000;
/// Default error-event count that ends an SNR point early.
pub const DEFAULT_MAX_ERRORS: u64 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "mod")]
    pub modulation: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub detector: Vec<Variant>,
    pub snr: Vec<f64>,
    /// User loads `K/N`; when non-empty each entry replaces `k` by `round(αN)`.
    pub alpha: Vec<f64>,
    pub trials: u64,
    /// Stop a point once every series has this many error events; `None`
    /// runs the full trial budget.
    pub max_errors: Option<u64>,
    pub seed: u64,
    pub psi: f64,
    pub phi: f64,
    pub gamma: f64,
    /// Detector iteration cap; for `complexity`, unset means each detector's
    /// customary iteration count.
    pub tmax: Option<usize>,
    pub zeta: f64,
    pub exact_sigma: bool,
    pub code_spec: Option<PathBuf>,
    pub list_size: usize,
    /// For `ber-approx`: also simulate each grid point.
    pub overlay: bool,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::BerSim,
            n: 32,
            k: 8,
            modulation: 4,
            detector: vec![Variant::BPicDsc],
            snr: vec![10.0],
            alpha: Vec::new(),
            trials: DEFAULT_TRIALS,
            max_errors: Some(DEFAULT_MAX_ERRORS),
            seed: 0,
            psi: 0.0,
            phi: 0.0,
            gamma: 0.0,
            tmax: None,
            zeta: 1e-4,
            exact_sigma: false,
            code_spec: None,
            list_size: 16,
            overlay: false,
            threads: None,
            out: None,
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Variant>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    let names = match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => s.split(',').map(str::to_string).collect(),
        OneOrMany::Many(v) => v,
    };
    names.iter().map(|s| Variant::from_str(s).map_err(serde::de::Error::custom)).collect()
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SimConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            psi: self.psi,
            rician_phi: self.phi,
            gamma: self.gamma,
        }
    }

    pub fn t_max(&self) -> usize {
        self.tmax.unwrap_or(10)
    }

    pub fn detector_config(&self, variant: Variant) -> DetectorConfig {
        DetectorConfig {
            variant,
            t_max: self.t_max(),
            zeta: self.zeta,
            exact_sigma: self.exact_sigma,
            trace: false,
        }
    }

    /// User counts to evaluate: `k`, or one per entry of `alpha`.
    pub fn user_counts(&self) -> Vec<usize> {
        if self.alpha.is_empty() {
            vec![self.k]
        } else {
            self.alpha.iter().map(|a| ((a * self.n as f64).round() as usize).max(1)).collect()
        }
    }

    /// SNR points in increasing order.
    pub fn snr_points(&self) -> Vec<f64> {
        let mut s = self.snr.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    pub fn code_spec(&self) -> Result<CodeSpecFile> {
        match &self.code_spec {
            Some(p) => CodeSpecFile::load(p),
            None => Ok(CodeSpecFile::default_256()),
        }
    }

    /// Checks every constraint that can be checked before running.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(config_error("n must be positive"));
        }
        if ![4, 16, 64].contains(&self.modulation) {
            return Err(config_error(format!("mod = {} (expected 4, 16 or 64)", self.modulation)));
        }
        for &a in &self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(config_error(format!("alpha = {a} outside (0, 1]")));
            }
        }
        for k in self.user_counts() {
            if k == 0 || k > self.n {
                return Err(config_error(format!("need 1 <= K <= N, got K = {k}, N = {}", self.n)));
            }
        }
        if self.detector.is_empty() {
            return Err(config_error("no detector given"));
        }
        if self.snr.is_empty() && self.experiment != Experiment::Complexity {
            return Err(config_error("no SNR points given"));
        }
        if let Some(s) = self.snr.iter().find(|s| !s.is_finite()) {
            return Err(config_error(format!("SNR {s} dB is not finite")));
        }
        let needs_trials = matches!(self.experiment, Experiment::BerSim | Experiment::FerSim | Experiment::Correlation)
            || (self.experiment == Experiment::BerApprox && self.overlay);
        if needs_trials && self.trials == 0 {
            return Err(config_error("trial budget must be at least 1"));
        }
        if self.trials >= 1 << 40 {
            return Err(config_error("trial budget above 2^40"));
        }
        if self.tmax == Some(0) {
            return Err(config_error("tmax must be at least 1"));
        }
        if self.zeta.is_nan() || self.zeta <= 0.0 {
            return Err(config_error(format!("zeta = {} must be positive", self.zeta)));
        }
        self.channel().validate().map_err(|e| config_error(e.to_string()))?;
        if self.threads == Some(0) {
            return Err(config_error("threads must be at least 1"));
        }
        if self.experiment == Experiment::FerSim {
            if self.list_size == 0 {
                return Err(config_error("list size must be at least 1"));
            }
            if self.user_counts().len() != 1 {
                return Err(config_error("fer-sim takes a single user count"));
            }
            let spec = self.code_spec().map_err(|e| config_error(e.to_string()))?;
            self.slots(&spec)?;
        }
        Ok(())
    }

    /// Channel uses per codeword, `Θ = η / (mK)`.
    pub fn slots(&self, spec: &CodeSpecFile) -> Result<usize> {
        let m = self.modulation.trailing_zeros() as usize;
        let per_slot = m * self.k;
        if per_slot == 0 || !spec.eta.is_multiple_of(per_slot) {
            return Err(config_error(format!("code length {} is not a multiple of m·K = {per_slot}", spec.eta)));
        }
        Ok(spec.eta / per_slot)
    }
}
