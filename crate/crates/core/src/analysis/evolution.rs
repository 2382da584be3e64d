//! Closed-form interference-plus-noise variance evolution and the BER it
//! predicts for the PIC-DSC detectors.
//!
//! Variances are expressed in units of the symbol energy E_s. The start
//! values take the physical noise variance σ² (under unit total transmit
//! energy), whose `Kσ²` term already carries that normalisation, while the
//! update step is fed the effective noise `σ²/E_s = Kσ²`. With this split the
//! matched-filter start `(K−1+Kσ²)/N` is exactly the update at `V = 1`.

use serde::{Deserialize, Serialize};

use super::quadrature::normal_rule;
use crate::model::Constellation;
use crate::{Error, Result};

/// Iteration cap for the evolution recursion.
pub const MAX_EVOLUTION_STEPS: usize = 1000;

/// First-iteration front end whose variance seeds the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Matched filter start (B-PIC-DSC).
    B,
    /// MMSE start (IB-PIC-DSC).
    Ib,
}

impl TryFrom<crate::detect::Variant> for Scheme {
    type Error = Error;

    fn try_from(v: crate::detect::Variant) -> Result<Self> {
        match v {
            crate::detect::Variant::BPicDsc => Ok(Scheme::B),
            crate::detect::Variant::IbPicDsc => Ok(Scheme::Ib),
            other => Err(Error::InvalidParameter(format!("no variance evolution for {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub t: usize,
    /// Interference-plus-noise variance of the observation.
    pub v: f64,
    /// Mean-square error of the Bayesian estimate.
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    /// Final variance `v^(T)`, in units of `E_s`.
    pub v: f64,
    pub iterations: usize,
    pub ber: f64,
    pub trajectory: Vec<EvolutionState>,
}

/// Start value of the recursion, evaluated exactly as the closed forms read.
pub fn v_initial(n: usize, k: usize, noise_variance: f64, scheme: Scheme) -> f64 {
    let (n, k) = (n as f64, k as f64);
    match scheme {
        Scheme::B => (k - 1.0 + k * noise_variance) / n,
        Scheme::Ib => {
            let alpha = k / n;
            let b = alpha * noise_variance + alpha - 1.0;
            (b + (b * b + 4.0 * alpha * noise_variance).sqrt()) / 2.0
        }
    }
}

/// `v = ((K−1)/N)·V + σ²/N`.
pub fn v_update(n: usize, k: usize, noise_variance: f64, mse: f64) -> f64 {
    ((k as f64 - 1.0) / n as f64) * mse + noise_variance / n as f64
}

/// MSE of the Bayesian estimate of a uniformly drawn constellation point
/// observed in circular Gaussian noise of variance `v`, with the estimator
/// itself assuming variance `v`.
///
/// The square constellation factorises into two identical PAM problems with
/// per-dimension noise `v/2`, so the result is twice a one-dimensional
/// expectation, evaluated by composite Gauss–Legendre quadrature against the
/// Gaussian density.
pub fn mse_update(v: f64, constellation: &Constellation) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return constellation.energy();
    }
    let levels = constellation.axis_levels();
    let rule = normal_rule();
    let s = (v / 2.0).sqrt();
    let mut total = 0.0;
    let mut logits = vec![0.0; levels.len()];
    for &l in levels {
        total += rule.expect(s, |noise| {
            let obs = l + noise;
            let mut top = f64::NEG_INFINITY;
            for (slot, &c) in logits.iter_mut().zip(levels) {
                *slot = -(obs - c) * (obs - c) / v;
                top = top.max(*slot);
            }
            let mut z = 0.0;
            let mut m = 0.0;
            for (slot, &c) in logits.iter().zip(levels) {
                let w = (slot - top).exp();
                z += w;
                m += w * c;
            }
            let err = l - m / z;
            err * err
        });
    }
    2.0 * total / levels.len() as f64
}

/// Uncoded Gray-QAM bit error rate at a per-symbol noise variance `v`
/// measured in units of `a²`, where `2a` is the minimum point spacing.
///
/// For 4-QAM this is `½ erfc(√(1/v))`; larger square constellations use the
/// usual nearest-neighbour sum over the first two error distances.
pub fn ber_from_variance(v: f64, order: usize) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let m = order.trailing_zeros() as f64;
    let side = (order as f64).sqrt();
    let terms = 2.min(order.isqrt() / 2);
    let coef = (4.0 / m) * (1.0 - 1.0 / side);
    let sum: f64 = (1..=terms)
        .map(|i| 0.5 * libm::erfc((2 * i - 1) as f64 * (1.0 / v).sqrt()))
        .sum();
    coef * sum
}

/// Runs the recursion from the scheme's start value until consecutive
/// variances differ by at most `zeta`.
pub fn run_evolution(
    n: usize,
    k: usize,
    noise_variance: f64,
    scheme: Scheme,
    constellation: &Constellation,
    zeta: f64,
) -> Result<Evolution> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("N={n}, K={k}")));
    }
    let es = constellation.energy();
    let noise = noise_variance / es;
    let mse = |v: f64| mse_update(v * es, constellation) / es;
    let mut v = v_initial(n, k, noise_variance, scheme);
    let mut big_v = mse(v);
    let mut trajectory = vec![EvolutionState { t: 0, v, mse: big_v }];
    for t in 1..=MAX_EVOLUTION_STEPS {
        let next = v_update(n, k, noise, big_v);
        big_v = mse(next);
        trajectory.push(EvolutionState { t, v: next, mse: big_v });
        let done = (next - v).abs() <= zeta;
        v = next;
        if done {
            let scale = es / (constellation.half_spacing() * constellation.half_spacing());
            return Ok(Evolution {
                v,
                iterations: t,
                ber: ber_from_variance(v * scale, constellation.order()),
                trajectory,
            });
        }
    }
    Err(Error::NoConvergence(MAX_EVOLUTION_STEPS))
}
