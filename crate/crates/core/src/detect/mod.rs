//! MIMO detectors sharing one interface: received vector, channel estimate,
//! noise variance and constellation in; soft statistics, hard decisions and
//! an optional iteration trace out.

mod flops;
pub mod linear;
pub mod ml;
pub mod pic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use flops::FlopCount;
pub use linear::{matched_filter, mmse_detect};
pub use ml::{ml_oracle, sphere_decode};
pub use pic::{bse_step, bso_step, dsc_step, instantaneous_error, matched_filter_rows};

use crate::model::Constellation;
use crate::{CMatrix, CVector, Error, Result, C64};
use pic::{ErrorFilter, Estimator, LoopSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "b-pic-dsc")]
    BPicDsc,
    #[serde(rename = "ib-pic-dsc")]
    IbPicDsc,
    #[serde(rename = "pic-dsc")]
    PicDsc,
    #[serde(rename = "mmse")]
    Mmse,
    #[serde(rename = "mf")]
    MatchedFilter,
    #[serde(rename = "ml")]
    Ml,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::BPicDsc,
        Variant::IbPicDsc,
        Variant::PicDsc,
        Variant::Mmse,
        Variant::MatchedFilter,
        Variant::Ml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::BPicDsc => "b-pic-dsc",
            Variant::IbPicDsc => "ib-pic-dsc",
            Variant::PicDsc => "pic-dsc",
            Variant::Mmse => "mmse",
            Variant::MatchedFilter => "mf",
            Variant::Ml => "ml",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "b-pic-dsc" | "bpicdsc" => Ok(Variant::BPicDsc),
            "ib-pic-dsc" | "ibpicdsc" => Ok(Variant::IbPicDsc),
            "pic-dsc" | "picdsc" => Ok(Variant::PicDsc),
            "mmse" => Ok(Variant::Mmse),
            "mf" | "matched-filter" => Ok(Variant::MatchedFilter),
            "ml" => Ok(Variant::Ml),
            _ => Err(Error::UnknownDetector(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub variant: Variant,
    pub t_max: usize,
    /// Stop once the change between successive iterates is at most this.
    pub zeta: f64,
    /// Use the full residual-interference variance instead of `σ²/‖h_k‖²`.
    pub exact_sigma: bool,
    /// Record a [`DetectorState`] per iteration.
    pub trace: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            variant: Variant::BPicDsc,
            t_max: 10,
            zeta: 1e-4,
            exact_sigma: false,
            trace: false,
        }
    }
}

impl DetectorConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max < 1 {
            return Err(Error::InvalidParameter("T_max must be at least 1".into()));
        }
        if self.zeta.is_nan() || self.zeta <= 0.0 {
            return Err(Error::InvalidParameter(format!("zeta = {} must be positive", self.zeta)));
        }
        Ok(())
    }
}

/// Snapshot of the iterative detector after iteration `iteration`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    pub iteration: usize,
    pub x_pic: CVector,
    pub sigma: Vec<f64>,
    pub x_hat: CVector,
    pub v: Vec<f64>,
    pub x_dsc: CVector,
    pub v_dsc: Vec<f64>,
    pub rho: Vec<f64>,
    pub e: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Final soft estimates fed to the demapper.
    pub soft_symbols: CVector,
    /// Variances paired with `soft_symbols`.
    pub soft_variances: Vec<f64>,
    pub hard_symbols: Vec<usize>,
    /// K·m hard bits, user-major.
    pub hard_bits: Vec<u8>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<DetectorState>,
    pub flops: FlopCount,
}

impl DetectionResult {
    pub(crate) fn from_soft(
        soft_symbols: CVector,
        soft_variances: Vec<f64>,
        constellation: &Constellation,
        iterations: usize,
        converged: bool,
        trace: Vec<DetectorState>,
        flops: FlopCount,
    ) -> Self {
        // Under a Gaussian observation the posterior argmax is the nearest
        // point, with ties going to the lowest label.
        let hard_symbols: Vec<usize> = soft_symbols.iter().map(|x| constellation.nearest(*x)).collect();
        Self::from_hard(soft_symbols, soft_variances, hard_symbols, constellation, iterations, converged, trace, flops)
    }

    #[allow(clippy::too_many_arguments)]
    fn from_hard(
        soft_symbols: CVector,
        soft_variances: Vec<f64>,
        hard_symbols: Vec<usize>,
        constellation: &Constellation,
        iterations: usize,
        converged: bool,
        trace: Vec<DetectorState>,
        flops: FlopCount,
    ) -> Self {
        let m = constellation.bits_per_symbol();
        let mut hard_bits = vec![0u8; hard_symbols.len() * m];
        for (label, out) in hard_symbols.iter().zip(hard_bits.chunks_mut(m)) {
            constellation.write_bits(*label, out);
        }
        Self {
            soft_symbols,
            soft_variances,
            hard_symbols,
            hard_bits,
            iterations,
            converged,
            trace,
            flops,
        }
    }
}

/// Runs the configured detector on one received vector.
pub fn detect(
    y: &CVector,
    h: &CMatrix,
    noise_variance: f64,
    constellation: &Constellation,
    cfg: &DetectorConfig,
) -> Result<DetectionResult> {
    cfg.validate()?;
    if y.len() != h.nrows() {
        return Err(Error::Shape(format!("y has {} entries, H has {} rows", y.len(), h.nrows())));
    }
    let (n, k) = h.shape();
    match cfg.variant {
        Variant::BPicDsc => pic::run_pic_loop(
            y,
            h,
            noise_variance,
            constellation,
            cfg,
            LoopSetup {
                prior: CVector::zeros(k),
                filter: ErrorFilter::Matched,
                estimator: Estimator::Bayesian,
                flops: FlopCount::default(),
            },
        ),
        Variant::IbPicDsc => {
            let mut flops = FlopCount::default();
            let (w_h, _) = linear::mmse_filter(h, noise_variance, &mut flops)?;
            flops.mul(n * k);
            let prior = &w_h * y;
            pic::run_pic_loop(
                y,
                h,
                noise_variance,
                constellation,
                cfg,
                LoopSetup {
                    prior,
                    filter: ErrorFilter::Rows(w_h),
                    estimator: Estimator::Bayesian,
                    flops,
                },
            )
        }
        Variant::PicDsc => pic_dsc_classical(y, h, noise_variance, constellation, cfg),
        Variant::MatchedFilter => {
            let energies = linear::column_energies(h)?;
            let z = h.ad_mul(y);
            let mut flops = FlopCount::default();
            flops.mul(2 * n * k + k);
            let soft = CVector::from_fn(k, |i, _| z[i] / energies[i]);
            let var = energies.iter().map(|e| noise_variance / e).collect();
            Ok(DetectionResult::from_soft(soft, var, constellation, 1, true, Vec::new(), flops))
        }
        Variant::Mmse => {
            let mut flops = FlopCount::default();
            let (w_h, mse) = linear::mmse_filter(h, noise_variance, &mut flops)?;
            flops.mul(n * k);
            let soft = &w_h * y;
            Ok(DetectionResult::from_soft(soft, mse, constellation, 1, true, Vec::new(), flops))
        }
        Variant::Ml => {
            let labels = ml::sphere_decode(y, h, constellation)?;
            let soft = CVector::from_iterator(k, labels.iter().map(|&l| constellation.point(l)));
            let energies = linear::column_energies(h)?;
            let var = energies.iter().map(|e| noise_variance / e).collect();
            Ok(DetectionResult::from_hard(
                soft,
                var,
                labels,
                constellation,
                1,
                true,
                Vec::new(),
                FlopCount::default(),
            ))
        }
    }
}

/// Classical PIC-DSC: the same loop with the matched-filter observation
/// passed on unchanged in place of the Bayesian estimator.
pub fn pic_dsc_classical(
    y: &CVector,
    h: &CMatrix,
    noise_variance: f64,
    constellation: &Constellation,
    cfg: &DetectorConfig,
) -> Result<DetectionResult> {
    cfg.validate()?;
    pic::run_pic_loop(
        y,
        h,
        noise_variance,
        constellation,
        cfg,
        LoopSetup {
            prior: CVector::from_element(h.ncols(), C64::new(0.0, 0.0)),
            filter: ErrorFilter::Matched,
            estimator: Estimator::Identity,
            flops: FlopCount::default(),
        },
    )
}
