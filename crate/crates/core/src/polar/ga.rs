//! Gaussian approximation of density evolution for SC decoding over a
//! binary-input AWGN channel, and the bias table built from it.

use serde::{Deserialize, Serialize};

/// Chung's approximation of `φ(x) = 1 − E[tanh(L/2)]`, `L ~ N(x, 2x)`.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp().min(1.0)
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

/// `ln φ(x)`, accurate where `φ` itself underflows.
pub fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Inverse of [`phi`] from a log-domain target, by bisection.
pub fn phi_inverse_ln(ln_y: f64) -> f64 {
    if ln_y >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ln_phi(hi) > ln_y {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > ln_y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR of the check-node (degraded) combination of two channels with
/// mean `mu`: `φ⁻¹(1 − (1 − φ(μ))²)`.
pub fn check_mean(mu: f64) -> f64 {
    // 1 − (1 − φ)² = φ(2 − φ), evaluated in the log domain.
    let lp = ln_phi(mu);
    let p = lp.exp();
    phi_inverse_ln(lp + (2.0 - p).ln())
}

/// Mean LLR of every synthetic channel `u_0 … u_{η−1}` of the transform,
/// starting from channel LLRs with mean `mu`.
pub fn subchannel_means(eta: usize, mu: f64) -> Vec<f64> {
    let mut means = vec![mu];
    while means.len() < eta {
        means = means.iter().flat_map(|&m| [check_mean(m), 2.0 * m]).collect();
    }
    means
}

/// Probability that a decision on an LLR ~ N(μ, 2μ) is wrong.
pub fn error_probability(mu: f64) -> f64 {
    0.5 * libm::erfc(mu.max(0.0).sqrt() / 2.0)
}

/// Mean channel LLR for antipodal signalling `±1` in real Gaussian noise of
/// variance `v`.
pub fn llr_mean_for_variance(v: f64) -> f64 {
    2.0 / v
}

/// Per-subchannel error probabilities under genie-aided SC decoding.
pub fn subchannel_error_probabilities(eta: usize, v: f64) -> Vec<f64> {
    subchannel_means(eta, llr_mean_for_variance(v)).into_iter().map(error_probability).collect()
}

/// Bias of the sequential decoder: `log Ω̂(i) = Σ_{j ∈ F, j ≥ i} ln(1 − P_j)`
/// with 0-based positions, so `log_omega[η] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTable {
    pub probabilities: Vec<f64>,
    pub log_omega: Vec<f64>,
}

impl BiasTable {
    pub fn new(probabilities: Vec<f64>, frozen: &[bool]) -> Self {
        let eta = probabilities.len();
        let mut log_omega = vec![0.0; eta + 1];
        for i in (0..eta).rev() {
            let term = if frozen[i] { (-probabilities[i]).ln_1p() } else { 0.0 };
            log_omega[i] = log_omega[i + 1] + term;
        }
        Self {
            probabilities,
            log_omega,
        }
    }
}
