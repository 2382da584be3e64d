//! Non-iterative linear front ends.

use nalgebra::{Cholesky, Dyn};

use super::FlopCount;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Squared column norms ‖h_k‖², failing on an all-zero column.
pub fn column_energies(h: &CMatrix) -> Result<Vec<f64>> {
    h.column_iter()
        .enumerate()
        .map(|(k, col)| {
            let e = col.norm_squared();
            if e > 0.0 {
                Ok(e)
            } else {
                Err(Error::ZeroColumn(k))
            }
        })
        .collect()
}

fn check_shapes(y: &CVector, h: &CMatrix) -> Result<()> {
    if y.len() != h.nrows() {
        return Err(Error::Shape(format!("y has {} entries, H has {} rows", y.len(), h.nrows())));
    }
    Ok(())
}

/// Per-user matched filter `h_kᴴ y / ‖h_k‖²`.
pub fn matched_filter(y: &CVector, h: &CMatrix) -> Result<CVector> {
    check_shapes(y, h)?;
    let energies = column_energies(h)?;
    let z = h.ad_mul(y);
    Ok(CVector::from_iterator(z.len(), z.iter().zip(&energies).map(|(v, e)| v / *e)))
}

/// Cholesky factor of `HᴴH + σ²I`, rejecting numerically singular systems.
fn factor(h: &CMatrix, noise_variance: f64) -> Result<Cholesky<C64, Dyn>> {
    let mut a = h.ad_mul(h);
    let mut scale = 0.0f64;
    for i in 0..a.nrows() {
        a[(i, i)] += C64::new(noise_variance, 0.0);
        scale = scale.max(a[(i, i)].re);
    }
    let chol = a.cholesky().ok_or(Error::Singular)?;
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| l[(i, i)].norm_sqr() <= 1e-12 * scale) {
        return Err(Error::Singular);
    }
    Ok(chol)
}

/// MMSE estimate `(HᴴH + σ²I)⁻¹ Hᴴ y`.
pub fn mmse_detect(y: &CVector, h: &CMatrix, noise_variance: f64) -> Result<CVector> {
    check_shapes(y, h)?;
    if noise_variance < 0.0 {
        return Err(Error::InvalidParameter(format!("noise variance {noise_variance}")));
    }
    let chol = factor(h, noise_variance)?;
    Ok(chol.solve(&h.ad_mul(y)))
}

/// The K x N MMSE filter `Wᴴ = (HᴴH + σ²I)⁻¹ Hᴴ` and the diagonal of the
/// error covariance `σ²(HᴴH + σ²I)⁻¹`.
pub fn mmse_filter(h: &CMatrix, noise_variance: f64, flops: &mut FlopCount) -> Result<(CMatrix, Vec<f64>)> {
    let (n, k) = h.shape();
    let chol = factor(h, noise_variance)?;
    let w_h = chol.solve(&h.adjoint());
    let inv = chol.inverse();
    let mse = (0..k).map(|i| noise_variance * inv[(i, i)].re).collect();
    // Gram matrix, factorisation and the solve against Hᴴ.
    flops.mul(n * k * k + k * k * k / 3 + n * k * k + k);
    Ok((w_h, mse))
}
