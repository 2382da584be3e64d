//! Soft demapping of per-user Gaussian observations into bit LLRs.

use crate::model::Constellation;
use crate::C64;

/// LLR magnitude limit; a collapsed variance would otherwise give infinities.
pub const LLR_CLIP: f64 = 50.0;

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Bit LLRs `ln P(b = 0)/P(b = 1)` for each user, `m` per user in label
/// order, from observations `x ~ CN(a, Σ)`.
pub fn demap_llr(x_pic: &[C64], sigma: &[f64], constellation: &Constellation) -> Vec<f64> {
    let m = constellation.bits_per_symbol();
    let mut out = Vec::with_capacity(x_pic.len() * m);
    for (&x, &s) in x_pic.iter().zip(sigma) {
        if !s.is_finite() || s <= 0.0 {
            let label = constellation.nearest(x);
            out.extend((0..m).map(|q| if constellation.bit(label, q) == 0 { LLR_CLIP } else { -LLR_CLIP }));
            continue;
        }
        let metric: Vec<f64> = constellation.points().iter().map(|a| -(x - a).norm_sqr() / s).collect();
        for q in 0..m {
            let [zero, one] = constellation.bit_subsets(q);
            let l0 = log_sum_exp(zero.iter().map(|&i| metric[i]));
            let l1 = log_sum_exp(one.iter().map(|&i| metric[i]));
            let llr = l0 - l1;
            out.push(if llr.is_nan() { 0.0 } else { llr.clamp(-LLR_CLIP, LLR_CLIP) });
        }
    }
    out
}
