use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, C64};

/// Channel impairments: receive-side spatial correlation `psi`, Rician factor
/// `rician_phi` and channel-estimation error magnitude `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelParams {
    pub psi: f64,
    pub rician_phi: f64,
    pub gamma: f64,
}

impl ChannelParams {
    pub fn rayleigh() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.psi) {
            return Err(Error::InvalidParameter(format!("psi = {} outside [0, 1)", self.psi)));
        }
        if !(self.rician_phi >= 0.0 && self.rician_phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("rician factor = {}", self.rician_phi)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!("gamma = {} outside [0, 1]", self.gamma)));
        }
        Ok(())
    }

    /// Mean and variance of each real dimension of a channel coefficient.
    pub fn rician_moments(&self) -> (f64, f64) {
        let phi = self.rician_phi;
        ((phi / (2.0 * (phi + 1.0))).sqrt(), 1.0 / (2.0 * (phi + 1.0)))
    }
}

/// One draw of the N x K channel together with the receiver's estimate of it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub h_hat: CMatrix,
    pub params: ChannelParams,
    pub noise_variance: f64,
}

impl ChannelRealization {
    pub fn receive_antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn users(&self) -> usize {
        self.h.ncols()
    }
}

/// Exponential correlation matrix with entries `psi^|i-j|`.
pub fn correlation_matrix(n: usize, psi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| psi.powi(i.abs_diff(j) as i32))
}

/// Reusable channel generator for fixed dimensions; caches the square-root
/// factor of the correlation matrix.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    n: usize,
    k: usize,
    params: ChannelParams,
    mean: f64,
    std_dev: f64,
    sqrt_corr: Option<DMatrix<f64>>,
}

impl ChannelModel {
    pub fn new(n: usize, k: usize, params: ChannelParams) -> Result<Self> {
        if k == 0 || n < k {
            return Err(Error::InvalidParameter(format!("need N >= K >= 1, got N={n}, K={k}")));
        }
        params.validate()?;
        let (mean, var) = params.rician_moments();
        let sqrt_corr = if params.psi > 0.0 {
            // Q is symmetric positive definite Toeplitz for psi < 1; the lower
            // Cholesky factor L satisfies L L^T = Q.
            let chol = correlation_matrix(n, params.psi)
                .cholesky()
                .ok_or_else(|| Error::InvalidParameter(format!("correlation matrix for psi={}", params.psi)))?;
            Some(chol.l())
        } else {
            None
        };
        Ok(Self {
            n,
            k,
            params,
            mean,
            std_dev: var.sqrt(),
            sqrt_corr,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn draw<R: Rng + ?Sized>(&self, noise_variance: f64, rng: &mut R) -> ChannelRealization {
        let (n, k) = (self.n, self.k);
        let mut h = CMatrix::from_fn(n, k, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(self.mean + self.std_dev * re, self.mean + self.std_dev * im)
        });
        if let Some(l) = &self.sqrt_corr {
            let lc = l.map(|v| C64::new(v, 0.0));
            h = lc * h;
        }
        let h_hat = if self.params.gamma > 0.0 {
            let g = self.params.gamma * std::f64::consts::FRAC_1_SQRT_2;
            let mut est = h.clone();
            for v in est.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v += C64::new(g * re, g * im);
            }
            est
        } else {
            h.clone()
        };
        ChannelRealization {
            h,
            h_hat,
            params: self.params,
            noise_variance,
        }
    }
}

/// One-shot channel draw from a seed.
pub fn draw_channel(
    n: usize,
    k: usize,
    params: ChannelParams,
    noise_variance: f64,
    seed: u64,
) -> Result<ChannelRealization> {
    let model = ChannelModel::new(n, k, params)?;
    let mut rng = crate::rng::seeded(seed);
    Ok(model.draw(noise_variance, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    #[test]
    fn rayleigh_moments() {
        let p = ChannelParams::rayleigh();
        assert_eq!(p.rician_moments(), (0.0, 0.5));
    }

    #[test]
    fn strong_line_of_sight_keeps_unit_gain() {
        for &phi in &[1.0, 10.0, 1e6] {
            let (mu, var) = ChannelParams { rician_phi: phi, ..Default::default() }.rician_moments();
            assert!((2.0 * mu * mu + 2.0 * var - 1.0).abs() < 1e-12);
            if phi >= 1e6 {
                assert!(var < 1e-6);
            }
        }
    }

    #[test]
    fn correlation_matrix_entries() {
        let q = correlation_matrix(3, 0.9);
        let expected = [[1.0, 0.9, 0.81], [0.9, 1.0, 0.9], [0.81, 0.9, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((q[(i, j)] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn perfect_csi_when_gamma_is_zero() {
        let ch = draw_channel(6, 3, ChannelParams::rayleigh(), 0.1, 5).unwrap();
        assert_eq!(ch.h, ch.h_hat);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        for p in [
            ChannelParams { psi: 1.0, ..Default::default() },
            ChannelParams { psi: -0.1, ..Default::default() },
            ChannelParams { rician_phi: -1.0, ..Default::default() },
            ChannelParams { gamma: 1.5, ..Default::default() },
        ] {
            assert!(ChannelModel::new(4, 2, p).is_err());
        }
        assert!(ChannelModel::new(2, 4, ChannelParams::rayleigh()).is_err());
    }

    #[test]
    fn iid_entries_have_unit_power() {
        let model = ChannelModel::new(8, 4, ChannelParams::rayleigh()).unwrap();
        let mut acc = 0.0;
        let mut mean = C64::new(0.0, 0.0);
        let draws = 4000;
        for t in 0..draws {
            let ch = model.draw(0.0, &mut trial_rng(1, 0, t));
            acc += ch.h.iter().map(|v| v.norm_sqr()).sum::<f64>();
            mean += ch.h.iter().sum::<C64>();
        }
        let count = (draws * 32) as f64;
        // Per-entry power is exponential(1): standard error 1/sqrt(count).
        assert!((acc / count - 1.0).abs() < 4.0 / count.sqrt(), "{}", acc / count);
        assert!((mean / count).norm() < 4.0 / count.sqrt());
    }

    #[test]
    fn sample_covariance_tracks_correlation() {
        let psi = 0.7;
        let n = 4;
        let model = ChannelModel::new(n, 2, ChannelParams { psi, ..Default::default() }).unwrap();
        let mut cov = nalgebra::DMatrix::<C64>::zeros(n, n);
        let draws = 20000u64;
        for t in 0..draws {
            let ch = model.draw(0.0, &mut trial_rng(2, 0, t));
            for col in ch.h.column_iter() {
                cov += col * col.adjoint();
            }
        }
        cov /= C64::new((2 * draws) as f64, 0.0);
        let q = correlation_matrix(n, psi);
        for i in 0..n {
            for j in 0..n {
                assert!((cov[(i, j)] - C64::new(q[(i, j)], 0.0)).norm() < 0.03, "({i},{j}) {}", cov[(i, j)]);
            }
        }
    }

    #[test]
    fn estimation_error_is_uncorrelated_with_channel() {
        let model = ChannelModel::new(4, 2, ChannelParams { gamma: 0.5, ..Default::default() }).unwrap();
        let mut cross = C64::new(0.0, 0.0);
        let mut err_pow = 0.0;
        let draws = 5000u64;
        for t in 0..draws {
            let ch = model.draw(0.0, &mut trial_rng(3, 0, t));
            let d = &ch.h_hat - &ch.h;
            cross += ch.h.iter().zip(d.iter()).map(|(h, e)| h.conj() * e).sum::<C64>();
            err_pow += d.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        let count = (draws * 8) as f64;
        assert!((err_pow / count - 0.25).abs() < 0.01);
        // |h||gamma delta| has std 0.5 per sample.
        assert!((cross / count).norm() < 4.0 * 0.5 / count.sqrt());
    }
}
