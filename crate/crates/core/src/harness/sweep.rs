//! Batched, thread-count independent Monte-Carlo loop for one SNR point.

use rayon::prelude::*;

use super::stats::{Tally, TrialOutcome};
use crate::rng::{trial_rng, SimRng};
use crate::Result;

/// Trials per batch. Stopping is only checked between batches, so the batch
/// boundaries (and therefore the results) do not depend on the thread count.
pub const BATCH: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopOn {
    BitErrors,
    FrameErrors,
}

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub trials: u64,
    pub max_errors: Option<u64>,
    pub stop_on: StopOn,
}

impl Budget {
    fn satisfied(&self, tallies: &[Tally]) -> bool {
        match self.max_errors {
            None => false,
            Some(limit) => tallies.iter().all(|t| {
                let events = match self.stop_on {
                    StopOn::BitErrors => t.bit_errors,
                    StopOn::FrameErrors => t.frame_errors,
                };
                events >= limit
            }),
        }
    }
}

/// Runs trials `0, 1, …` of sweep point `point`, each on its own random
/// stream, until the budget is spent. `trial` returns one outcome per series.
pub fn run_point<F>(seed: u64, point: u64, series: usize, budget: Budget, trial: F) -> Result<Vec<Tally>>
where
    F: Fn(&mut SimRng) -> Result<Vec<TrialOutcome>> + Sync,
{
    let mut tallies = vec![Tally::default(); series];
    let mut next = 0;
    while next < budget.trials && !budget.satisfied(&tallies) {
        let end = (next + BATCH).min(budget.trials);
        let outcomes: Vec<Vec<TrialOutcome>> = (next..end)
            .into_par_iter()
            .map(|t| trial(&mut trial_rng(seed, point, t)))
            .collect::<Result<_>>()?;
        for per_trial in &outcomes {
            for (tally, o) in tallies.iter_mut().zip(per_trial) {
                tally.record(o);
            }
        }
        next = end;
    }
    Ok(tallies)
}
