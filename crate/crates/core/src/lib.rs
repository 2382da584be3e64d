//! Link-level massive-MIMO simulation toolkit.
//!
//! The crate is organised around the receive chain:
//!
//! * [`model`]: square QAM constellations, Rayleigh/Rician channels with spatial
//!   correlation and estimation error, and the uncoded transmit path.
//! * [`detect`]: the Bayesian PIC-DSC detector family (and its MMSE-initialised
//!   variant) next to matched-filter, MMSE, classical PIC-DSC and ML baselines.
//! * [`analysis`]: SINR-variance evolution for closed-form BER prediction and
//!   the multiplication-count table for the detectors.
//! * [`polar`]: CRC-aided polar codes with SC, stack (SCS) and biased
//!   sequential decoders.
//! * [`harness`]: Monte-Carlo sweeps with reproducible per-trial seeds and CSV
//!   output, driven by the `mimorx` binary.

pub mod analysis;
pub mod detect;
pub mod error;
pub mod harness;
pub mod model;
pub mod polar;
pub mod rng;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (channel, filters).
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector (received signal, symbol estimates).
pub type CVector = nalgebra::DVector<C64>;
