//! Closed-form analysis: variance evolution for BER prediction and detector
//! multiplication counts.

pub mod complexity;
pub mod evolution;
pub mod quadrature;

pub use complexity::{multiplication_count, ComplexitySpec, CountedDetector};
pub use evolution::{
    ber_from_variance, mse_update, run_evolution, v_initial, v_update, Evolution, EvolutionState, Scheme,
};
