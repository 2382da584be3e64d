use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign};

/// Operation counts accumulated by detectors and decoders. A complex
/// multiplication, a real multiplication and a division each count as one
/// multiplication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopCount {
    pub additions: u64,
    pub comparisons: u64,
    pub multiplications: u64,
}

impl FlopCount {
    pub fn mul(&mut self, n: usize) {
        self.multiplications += n as u64;
    }

    pub fn add(&mut self, n: usize) {
        self.additions += n as u64;
    }

    pub fn cmp(&mut self, n: usize) {
        self.comparisons += n as u64;
    }
}

impl Add for FlopCount {
    type Output = FlopCount;

    fn add(self, o: FlopCount) -> FlopCount {
        FlopCount {
            additions: self.additions + o.additions,
            comparisons: self.comparisons + o.comparisons,
            multiplications: self.multiplications + o.multiplications,
        }
    }
}

impl AddAssign for FlopCount {
    fn add_assign(&mut self, o: FlopCount) {
        *self = *self + o;
    }
}
