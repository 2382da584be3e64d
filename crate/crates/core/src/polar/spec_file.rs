//! JSON code-spec files and plain-text reliability sequences.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::code::{construct_code, FrozenSource, PolarCode};
use super::crc::Crc;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrozenSourceKind {
    Ga,
    File,
}

/// On-disk description of a code. A relative `frozen_file` is resolved
/// against the directory of the spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpecFile {
    pub eta: usize,
    pub kappa: usize,
    #[serde(default = "default_crc_len")]
    pub crc_len: usize,
    #[serde(default = "default_crc_poly")]
    pub crc_poly_hex: String,
    #[serde(default = "default_source")]
    pub frozen_source: FrozenSourceKind,
    #[serde(default)]
    pub frozen_file: Option<PathBuf>,
    #[serde(default)]
    pub interleaver_seed: u64,
}

fn default_crc_len() -> usize {
    11
}

fn default_crc_poly() -> String {
    "0xE21".into()
}

fn default_source() -> FrozenSourceKind {
    FrozenSourceKind::Ga
}

impl CodeSpecFile {
    /// The (256, 139) half-rate code with CRC-11 and a GA frozen set.
    pub fn default_256() -> Self {
        Self {
            eta: 256,
            kappa: 139,
            crc_len: default_crc_len(),
            crc_poly_hex: default_crc_poly(),
            frozen_source: FrozenSourceKind::Ga,
            frozen_file: None,
            interleaver_seed: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::CodeSpec(format!("{}: {e}", path.display())))?;
        let mut spec: Self = serde_json::from_str(&text).map_err(|e| Error::CodeSpec(format!("{}: {e}", path.display())))?;
        if let (Some(file), Some(dir)) = (&spec.frozen_file, path.parent()) {
            if file.is_relative() {
                spec.frozen_file = Some(dir.join(file));
            }
        }
        Ok(spec)
    }

    pub fn crc(&self) -> Result<Crc> {
        if self.crc_len == 0 {
            return Ok(Crc::none());
        }
        let hex = self.crc_poly_hex.trim();
        let digits = hex.strip_prefix("0x").or_else(|| hex.strip_prefix("0X")).unwrap_or(hex);
        let poly = u64::from_str_radix(digits, 16).map_err(|_| Error::CodeSpec(format!("bad CRC polynomial `{hex}`")))?;
        Crc::new(self.crc_len, poly)
    }

    /// Builds the code. The external file takes precedence when selected;
    /// otherwise the frozen set is ranked by GA at `design_variance`.
    pub fn build(&self, design_variance: f64) -> Result<PolarCode> {
        let source = match self.frozen_source {
            FrozenSourceKind::File => {
                let path = self
                    .frozen_file
                    .as_ref()
                    .ok_or_else(|| Error::CodeSpec("frozen_source is \"file\" but frozen_file is missing".into()))?;
                FrozenSource::Reliability(read_reliability(path)?)
            }
            FrozenSourceKind::Ga => FrozenSource::Ga { design_variance },
        };
        construct_code(self.eta, self.kappa, self.crc()?, &source, self.interleaver_seed)
    }
}

/// Reads one 0-based index per line, most reliable first. Blank lines and
/// lines starting with `#` are ignored.
pub fn read_reliability(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::CodeSpec(format!("{}: {e}", path.display())))?;
    parse_reliability(&text)
}

pub fn parse_reliability(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().map_err(|_| Error::CodeSpec(format!("bad reliability entry `{l}`"))))
        .collect()
}
