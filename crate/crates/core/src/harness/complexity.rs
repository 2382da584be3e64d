//! Multiplication-count tables.

use super::config::SimConfig;
use super::output::ComplexityRow;
use crate::analysis::{multiplication_count, ComplexitySpec, CountedDetector};
use crate::Result;

/// Every counted detector at every configured user count. Without `tmax`
/// each detector uses its customary iteration count.
pub fn run_complexity(cfg: &SimConfig) -> Result<Vec<ComplexityRow>> {
    cfg.validate()?;
    let m = cfg.modulation;
    let mut rows = Vec::new();
    for k in cfg.user_counts() {
        for d in CountedDetector::ALL {
            let t = cfg.tmax.unwrap_or_else(|| d.default_iterations());
            let count = multiplication_count(&ComplexitySpec::new(d, cfg.n, k, m, t))?;
            rows.push(ComplexityRow {
                detector: d.name().to_string(),
                n: cfg.n,
                k,
                m,
                t,
                multiplications: count.to_string(),
            });
        }
    }
    Ok(rows)
}
