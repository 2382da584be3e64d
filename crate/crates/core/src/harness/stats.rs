//! Integer tallies and the statistics derived from them.

use serde::{Deserialize, Serialize};

use crate::detect::FlopCount;

/// What one trial contributes to one series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_error: bool,
    pub iterations: u64,
    pub flops: FlopCount,
}

/// Exact integer sums over trials, so the order of accumulation is irrelevant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub iterations: u64,
    pub flops: FlopCount,
}

impl Tally {
    pub fn record(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        self.bits += o.bits;
        self.bit_errors += o.bit_errors;
        self.frame_errors += o.frame_error as u64;
        self.iterations += o.iterations;
        self.flops += o.flops;
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.trials)
    }

    pub fn mean(&self, total: u64) -> f64 {
        ratio(total, self.trials)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Half-width of the normal-approximation 95% interval of a binomial rate.
pub fn ci95_halfwidth(events: u64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let p = events as f64 / samples as f64;
    1.959963984540054 * (p * (1.0 - p) / samples as f64).sqrt()
}

/// Running sums for a Pearson correlation of paired samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.count += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    pub fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.syy += o.syy;
        self.sxy += o.sxy;
    }

    /// `None` with fewer than two pairs or when either side has no spread.
    pub fn correlation(&self) -> Option<f64> {
        if self.count < 2 {
            return None;
        }
        let n = self.count as f64;
        let cxx = self.sxx - self.sx * self.sx / n;
        let cyy = self.syy - self.sy * self.sy / n;
        let cxy = self.sxy - self.sx * self.sy / n;
        // Cancellation leaves O(ε·Σx²) residue when a side is constant.
        let tol_x = 1e-12 * self.sxx.max(f64::MIN_POSITIVE);
        let tol_y = 1e-12 * self.syy.max(f64::MIN_POSITIVE);
        if !(cxx > tol_x && cyy > tol_y) {
            return None;
        }
        Some((cxy / (cxx * cyy).sqrt()).clamp(-1.0, 1.0))
    }
}
