//! Closed-form multiplication counts of MIMO detectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Detectors with a closed-form multiplication count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CountedDetector {
    AmiGs,
    HfAdmm,
    Hi,
    Mmse,
    MmseSic,
    PicDsc,
    Amp,
    Oamp,
    BPicDsc,
    IbPicDsc,
    EpNsa,
    Epa,
    DEp,
    Ep,
}

impl CountedDetector {
    pub const ALL: [CountedDetector; 14] = [
        CountedDetector::AmiGs,
        CountedDetector::HfAdmm,
        CountedDetector::Hi,
        CountedDetector::Mmse,
        CountedDetector::MmseSic,
        CountedDetector::PicDsc,
        CountedDetector::Amp,
        CountedDetector::Oamp,
        CountedDetector::BPicDsc,
        CountedDetector::IbPicDsc,
        CountedDetector::EpNsa,
        CountedDetector::Epa,
        CountedDetector::DEp,
        CountedDetector::Ep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CountedDetector::AmiGs => "ami-gs",
            CountedDetector::HfAdmm => "hf-admm",
            CountedDetector::Hi => "hi",
            CountedDetector::Mmse => "mmse",
            CountedDetector::MmseSic => "mmse-sic",
            CountedDetector::PicDsc => "pic-dsc",
            CountedDetector::Amp => "amp",
            CountedDetector::Oamp => "oamp",
            CountedDetector::BPicDsc => "b-pic-dsc",
            CountedDetector::IbPicDsc => "ib-pic-dsc",
            CountedDetector::EpNsa => "ep-nsa",
            CountedDetector::Epa => "epa",
            CountedDetector::DEp => "d-ep",
            CountedDetector::Ep => "ep",
        }
    }

    /// Iteration count used when comparing detectors at equal footing: the
    /// MMSE-approximating schemes run five iterations, the rest ten.
    pub fn default_iterations(self) -> usize {
        match self {
            CountedDetector::AmiGs | CountedDetector::HfAdmm | CountedDetector::Hi | CountedDetector::PicDsc => 5,
            _ => 10,
        }
    }
}

impl fmt::Display for CountedDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CountedDetector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let key = match key.as_str() {
            "ami" => "ami-gs",
            "hf" => "hf-admm",
            other => other,
        };
        CountedDetector::ALL
            .into_iter()
            .find(|d| d.name() == key)
            .ok_or_else(|| Error::UnknownDetector(s.to_string()))
    }
}

impl From<CountedDetector> for String {
    fn from(d: CountedDetector) -> String {
        d.name().to_string()
    }
}

impl TryFrom<String> for CountedDetector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parameters of one evaluation. `clusters` is only used by D-EP, whose
/// cluster size is `N / clusters`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexitySpec {
    pub detector: CountedDetector,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub clusters: usize,
}

impl ComplexitySpec {
    pub const DEFAULT_CLUSTERS: usize = 4;

    pub fn new(detector: CountedDetector, n: usize, k: usize, m: usize, t: usize) -> Self {
        Self {
            detector,
            n,
            k,
            m,
            t,
            clusters: Self::DEFAULT_CLUSTERS,
        }
    }
}

/// Number of multiplications of the named detector.
pub fn multiplication_count(spec: &ComplexitySpec) -> Result<i128> {
    if spec.n == 0 || spec.k == 0 || spec.m == 0 || spec.t == 0 {
        return Err(Error::InvalidParameter(format!(
            "N={}, K={}, M={}, T={} must all be positive",
            spec.n, spec.k, spec.m, spec.t
        )));
    }
    let (n, k, m, t) = (spec.n as i128, spec.k as i128, spec.m as i128, spec.t as i128);
    let count = match spec.detector {
        CountedDetector::AmiGs => (4 * n + 4 * t - 2) * k * k + 2 * (n - 2 * t + 1) * k,
        CountedDetector::HfAdmm => 2 * n * k * k + (n + 1) * k + (n * k * k + 9 * k * k) * t,
        CountedDetector::Hi => 5 * k * k + k - 6 + (2 * k * k + 8 * k + 6) * t,
        CountedDetector::Mmse => (n + 1) * k * k + n * n * k + n * k,
        CountedDetector::MmseSic => (0..=k).map(|j| (n + 1) * j * j + n * n * j + n * j).sum(),
        CountedDetector::PicDsc => 4 * (n + 1) * k * t,
        CountedDetector::Amp => (4 * n * k + 8 * n + 6 * k + 4 * m * k) * t,
        CountedDetector::Oamp => (k - 1) * n * k + (2 * n * n * k + n * k * k + 2 * n * k + 12 * k + 4 * m * k + 8) * t,
        CountedDetector::BPicDsc => (4 * n * k + 12 * k + 4 * m * k) * t - (n * k + 5 * k),
        CountedDetector::IbPicDsc => n * n * k + n * k * k - 4 * k - 2 * n * k + (4 * n * k + 12 * k + 4 * m * k) * t,
        CountedDetector::EpNsa => {
            (n + 1) * k * k + (n * n + n + 1) * k + ((k + 1) * 2 * k * k + (4 * n + 4 * m + 14) * k) * t
        }
        CountedDetector::Epa => (n + 1) * k * k + (n * n - 1) * k + (2 * n + 4 * m + 8) * k * t,
        CountedDetector::DEp => {
            let c = spec.clusters as i128;
            if c == 0 || !spec.n.is_multiple_of(spec.clusters) {
                return Err(Error::InvalidParameter(format!(
                    "{} clusters do not divide N={}",
                    spec.clusters, spec.n
                )));
            }
            let nc = n / c;
            (k * k + k) * nc * c + (nc * nc * c + k * c + 3 * c + 4 * m + 17) * k * t
        }
        CountedDetector::Ep => n * k * k + (n - 1) * k + (n * n * k + k * k + 19 * k + 4 * m * k) * t,
    };
    Ok(count)
}
