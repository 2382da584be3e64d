//! Monte-Carlo experiments behind the `mimorx` binary. Every trial draws
//! from its own seeded stream and results are aggregated as integers, so a
//! run is reproducible bit for bit regardless of the thread count.

pub mod approx;
pub mod ber;
pub mod complexity;
pub mod config;
pub mod correlation;
pub mod fer;
pub mod output;
pub mod stats;
pub mod sweep;

pub use approx::run_ber_approx;
pub use ber::{ber_trial, run_ber_sim};
pub use complexity::run_complexity;
pub use config::{Experiment, SimConfig};
pub use correlation::run_correlation;
pub use fer::{run_fer_sim, CodedLink};
pub use output::{ComplexityRow, CorrelationRow, Report, SweepResult, SweepRow, SCHEMA_TAG};
pub use stats::{ci95_halfwidth, Tally, TrialOutcome};

use crate::{Error, Result};

/// Runs the configured experiment, on a dedicated pool when `threads` is set.
pub fn run(cfg: &SimConfig) -> Result<Report> {
    cfg.validate()?;
    let go = || -> Result<Report> {
        Ok(match cfg.experiment {
            Experiment::BerSim => Report::Sweep(run_ber_sim(cfg)?),
            Experiment::BerApprox => Report::Sweep(run_ber_approx(cfg)?),
            Experiment::FerSim => Report::Sweep(run_fer_sim(cfg)?),
            Experiment::Complexity => Report::Complexity(run_complexity(cfg)?),
            Experiment::Correlation => Report::Correlation(run_correlation(cfg)?),
        })
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(go),
        None => go(),
    }
}
