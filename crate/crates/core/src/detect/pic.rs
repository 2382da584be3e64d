//! Building blocks of the iterative PIC-DSC detectors and the shared loop.

use super::{DetectionResult, DetectorConfig, DetectorState, FlopCount};
use crate::model::Constellation;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Soft observation of one PIC pass: per-user estimate and its variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x_pic: CVector,
    pub sigma: Vec<f64>,
}

/// Output of the Bayesian symbol estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct BseOutput {
    pub mean: CVector,
    pub variance: Vec<f64>,
    /// Row-major K x M table of per-user posterior probabilities.
    pub posterior: Vec<f64>,
}

/// Output of the decision statistics combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct DscOutput {
    pub x: CVector,
    pub v: Vec<f64>,
    pub rho: Vec<f64>,
}

/// How the instantaneous error of each symbol estimate is measured.
#[derive(Debug, Clone)]
pub enum ErrorFilter {
    /// `w_kᴴ = h_kᴴ / ‖h_k‖²`.
    Matched,
    /// Explicit K x N filter whose row k is `w_kᴴ`.
    Rows(CMatrix),
}

/// Symbol estimator used between the observation and the combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Bayesian,
    /// Identity mapping `x̂ = x_pic` with variance `Σ`, as in classical
    /// (linear) PIC-DSC.
    Identity,
}

fn check(y: &CVector, h: &CMatrix, x: &CVector) -> Result<()> {
    if y.len() != h.nrows() || x.len() != h.ncols() {
        return Err(Error::Shape(format!(
            "H is {}x{}, y has {} and x has {} entries",
            h.nrows(),
            h.ncols(),
            y.len(),
            x.len()
        )));
    }
    Ok(())
}

/// One PIC observation pass.
///
/// `x_pic_k = h_kᴴ(y − H x_prior\k)/‖h_k‖²`; the variance is the usual
/// `σ²/‖h_k‖²` unless `exact_sigma` is set, in which case the residual
/// interference weighted by the prior variances is included.
pub fn bso_step(
    y: &CVector,
    h: &CMatrix,
    prior: &CVector,
    prior_v: &[f64],
    noise_variance: f64,
    exact_sigma: bool,
) -> Result<Observation> {
    check(y, h, prior)?;
    if prior_v.len() != h.ncols() {
        return Err(Error::Shape(format!("{} prior variances for {} users", prior_v.len(), h.ncols())));
    }
    let energies = super::linear::column_energies(h)?;
    let gram = exact_sigma.then(|| h.ad_mul(h));
    let mut flops = FlopCount::default();
    let r = y - h * prior;
    let g = h.ad_mul(&r);
    Ok(observe(prior, &g, prior_v, &energies, noise_variance, gram.as_ref(), &mut flops))
}

fn observe(
    prior: &CVector,
    g: &CVector,
    prior_v: &[f64],
    energies: &[f64],
    noise_variance: f64,
    gram: Option<&CMatrix>,
    flops: &mut FlopCount,
) -> Observation {
    let k = prior.len();
    let x_pic = CVector::from_fn(k, |i, _| prior[i] + g[i] / energies[i]);
    let sigma: Vec<f64> = match gram {
        None => energies.iter().map(|e| noise_variance / e).collect(),
        Some(s) => (0..k)
            .map(|i| {
                let interference: f64 = (0..k).filter(|&j| j != i).map(|j| s[(i, j)].norm_sqr() * prior_v[j]).sum();
                (interference + energies[i] * noise_variance) / (energies[i] * energies[i])
            })
            .collect(),
    };
    flops.mul(2 * k);
    if gram.is_some() {
        flops.mul(2 * k * k);
    }
    Observation { x_pic, sigma }
}

/// Posterior mean and variance of each user's symbol under the Gaussian
/// observation `N(x_pic_k, Σ_k)` and a uniform prior over the constellation.
///
/// Computed in the log domain with the largest exponent subtracted. A
/// non-positive variance collapses the posterior onto the nearest point.
pub fn bse_step(x_pic: &CVector, sigma: &[f64], constellation: &Constellation) -> BseOutput {
    let m = constellation.order();
    let mut posterior = vec![0.0; x_pic.len() * m];
    let (mean, variance) = bse_into(x_pic, sigma, constellation, &mut posterior, &mut FlopCount::default());
    BseOutput {
        mean,
        variance,
        posterior,
    }
}

fn bse_into(
    x_pic: &CVector,
    sigma: &[f64],
    constellation: &Constellation,
    posterior: &mut [f64],
    flops: &mut FlopCount,
) -> (CVector, Vec<f64>) {
    let points = constellation.points();
    let m = points.len();
    let k = x_pic.len();
    let max_v = constellation.max_energy();
    let mut mean = CVector::zeros(k);
    let mut variance = vec![0.0; k];
    for (i, row) in posterior.chunks_mut(m).enumerate().take(k) {
        let x = x_pic[i];
        let s = sigma[i];
        if !s.is_finite() || s <= 0.0 {
            row.fill(0.0);
            let best = constellation.nearest(x);
            row[best] = 1.0;
            mean[i] = points[best];
            continue;
        }
        let inv = 1.0 / s;
        let mut top = f64::NEG_INFINITY;
        for (slot, a) in row.iter_mut().zip(points) {
            *slot = -(x - a).norm_sqr() * inv;
            top = top.max(*slot);
        }
        let mut total = 0.0;
        let mut first = C64::new(0.0, 0.0);
        let mut second = 0.0;
        for (slot, a) in row.iter_mut().zip(points) {
            *slot = (*slot - top).exp();
            total += *slot;
            first += a * *slot;
            second += a.norm_sqr() * *slot;
        }
        let norm = 1.0 / total;
        for slot in row.iter_mut() {
            *slot *= norm;
        }
        mean[i] = first * norm;
        variance[i] = (second * norm - mean[i].norm_sqr()).clamp(0.0, max_v);
    }
    // Distance, scaling and the two moment accumulations per point, plus the
    // per-user normalisation.
    flops.mul(4 * m * k + 5 * k);
    (mean, variance)
}

/// DSC combination `x = (1−ρ) x̂_prev + ρ x̂` with `ρ = e_prev/(e + e_prev)`.
/// A zero denominator trusts the current estimate.
pub fn dsc_step(
    x_hat: &CVector,
    v: &[f64],
    x_hat_prev: &CVector,
    v_prev: &[f64],
    e: &[f64],
    e_prev: &[f64],
) -> DscOutput {
    let k = x_hat.len();
    let rho: Vec<f64> = e
        .iter()
        .zip(e_prev)
        .map(|(&now, &before)| {
            let den = now + before;
            if den > 0.0 {
                before / den
            } else {
                1.0
            }
        })
        .collect();
    let x = CVector::from_fn(k, |i, _| x_hat_prev[i] * (1.0 - rho[i]) + x_hat[i] * rho[i]);
    let v = (0..k).map(|i| (1.0 - rho[i]) * v_prev[i] + rho[i] * v[i]).collect();
    DscOutput { x, v, rho }
}

/// Instantaneous squared errors `|w_kᴴ (y − H x̂)|²` for filter rows `w_h`.
pub fn instantaneous_error(y: &CVector, h: &CMatrix, x_hat: &CVector, w_h: &CMatrix) -> Result<Vec<f64>> {
    check(y, h, x_hat)?;
    if w_h.shape() != (h.ncols(), h.nrows()) {
        return Err(Error::Shape(format!("filter is {}x{}", w_h.nrows(), w_h.ncols())));
    }
    let r = y - h * x_hat;
    Ok((w_h * r).iter().map(|v| v.norm_sqr()).collect())
}

/// Rows `h_kᴴ/‖h_k‖²` of the matched filter.
pub fn matched_filter_rows(h: &CMatrix) -> Result<CMatrix> {
    let energies = super::linear::column_energies(h)?;
    let mut w = h.adjoint();
    for (i, mut row) in w.row_iter_mut().enumerate() {
        row /= C64::new(energies[i], 0.0);
    }
    Ok(w)
}

/// Inputs of the iterative loop that differ between detector variants.
pub(crate) struct LoopSetup {
    pub prior: CVector,
    pub filter: ErrorFilter,
    pub estimator: Estimator,
    pub flops: FlopCount,
}

/// The PIC → estimate → DSC iteration shared by all iterative variants.
pub(crate) fn run_pic_loop(
    y: &CVector,
    h: &CMatrix,
    noise_variance: f64,
    constellation: &Constellation,
    cfg: &DetectorConfig,
    setup: LoopSetup,
) -> Result<DetectionResult> {
    let (n, k) = h.shape();
    check(y, h, &setup.prior)?;
    let LoopSetup {
        prior,
        filter,
        estimator,
        mut flops,
    } = setup;
    let energies = super::linear::column_energies(h)?;
    flops.mul(n * k + k);
    let inv_sq: Vec<f64> = energies.iter().map(|e| 1.0 / (e * e)).collect();
    let gram = if cfg.exact_sigma {
        flops.mul(n * k * k);
        Some(h.ad_mul(h))
    } else {
        None
    };
    let mut posterior_scratch = vec![0.0; k * constellation.order()];

    let prior_is_zero = prior.iter().all(|v| *v == C64::new(0.0, 0.0));
    let mut x_prior = prior;
    let mut v_prior = vec![1.0; k];
    let mut x_dsc_prev = x_prior.clone();
    let mut cached: Option<CVector> = None;
    let mut previous: Option<(CVector, Vec<f64>, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut obs = Observation {
        x_pic: CVector::zeros(k),
        sigma: vec![0.0; k],
    };
    let mut converged = false;
    let mut t = 0;

    while t < cfg.t_max {
        t += 1;
        let g = match cached.take() {
            Some(g) => g,
            None if t == 1 && prior_is_zero => {
                flops.mul(n * k);
                h.ad_mul(y)
            }
            None => {
                flops.mul(2 * n * k);
                h.ad_mul(&(y - h * &x_prior))
            }
        };
        obs = observe(&x_prior, &g, &v_prior, &energies, noise_variance, gram.as_ref(), &mut flops);

        let (x_hat, v) = match estimator {
            Estimator::Bayesian => bse_into(&obs.x_pic, &obs.sigma, constellation, &mut posterior_scratch, &mut flops),
            Estimator::Identity => (obs.x_pic.clone(), obs.sigma.clone()),
        };

        let residual = y - h * &x_hat;
        flops.mul(n * k);
        let (e, matched_g) = match &filter {
            ErrorFilter::Matched => {
                let gh = h.ad_mul(&residual);
                flops.mul(n * k + 2 * k);
                let e: Vec<f64> = gh.iter().zip(&inv_sq).map(|(v, s)| v.norm_sqr() * s).collect();
                (e, Some(gh))
            }
            ErrorFilter::Rows(w_h) => {
                flops.mul(n * k + k);
                ((w_h * &residual).iter().map(|v| v.norm_sqr()).collect(), None)
            }
        };

        let dsc = match &previous {
            None => DscOutput {
                x: x_hat.clone(),
                v: v.clone(),
                rho: vec![1.0; k],
            },
            Some((xp, vp, ep)) => {
                flops.mul(5 * k);
                dsc_step(&x_hat, &v, xp, vp, &e, ep)
            }
        };

        let delta = (0..k).map(|i| (dsc.x[i] - x_dsc_prev[i]).norm()).fold(0.0, f64::max);
        converged = delta <= cfg.zeta;

        // With every weight at one the next prior is x̂ itself, whose filtered
        // residual Hᴴ(y − H x̂) is already at hand.
        if dsc.rho.iter().all(|r| *r == 1.0) {
            cached = matched_g;
        }
        if cfg.trace {
            trace.push(DetectorState {
                iteration: t,
                x_pic: obs.x_pic.clone(),
                sigma: obs.sigma.clone(),
                x_hat: x_hat.clone(),
                v: v.clone(),
                x_dsc: dsc.x.clone(),
                v_dsc: dsc.v.clone(),
                rho: dsc.rho.clone(),
                e: e.clone(),
                converged,
            });
        }
        x_dsc_prev = dsc.x.clone();
        x_prior = dsc.x;
        v_prior = dsc.v;
        previous = Some((x_hat, v, e));
        if converged {
            break;
        }
    }

    Ok(DetectionResult::from_soft(obs.x_pic, obs.sigma, constellation, t, converged, trace, flops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{linear, Variant};
    use crate::model::{draw_channel, ChannelParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_prior_reproduces_matched_filter() {
        let ch = draw_channel(8, 3, ChannelParams::rayleigh(), 0.1, 4).unwrap();
        let y = CVector::from_fn(8, |i, _| c(0.3 * i as f64, -0.1));
        let obs = bso_step(&y, &ch.h, &CVector::zeros(3), &[1.0; 3], 0.1, false).unwrap();
        let mf = linear::matched_filter(&y, &ch.h).unwrap();
        assert_eq!(obs.x_pic, mf);
    }

    #[test]
    fn single_user_has_no_interference_term() {
        let ch = draw_channel(4, 1, ChannelParams::rayleigh(), 0.2, 8).unwrap();
        let y = CVector::from_element(4, c(1.0, 0.0));
        let e = ch.h.norm_squared();
        for exact in [false, true] {
            let obs = bso_step(&y, &ch.h, &CVector::from_element(1, c(0.2, 0.2)), &[0.7], 0.2, exact).unwrap();
            assert!((obs.sigma[0] - 0.2 / e).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_sigma_matches_direct_summation() {
        let ch = draw_channel(5, 3, ChannelParams::rayleigh(), 0.0, 13).unwrap();
        let h = &ch.h;
        let y = CVector::from_fn(5, |i, _| c(i as f64, 1.0));
        let v = [0.2, 0.5, 0.9];
        let s2 = 0.3;
        let obs = bso_step(&y, h, &CVector::zeros(3), &v, s2, true).unwrap();
        for k in 0..3 {
            let hk: f64 = (0..5).map(|n| h[(n, k)].norm_sqr()).sum();
            let mut acc = hk * s2;
            for j in 0..3 {
                if j == k {
                    continue;
                }
                let s: C64 = (0..5).map(|n| h[(n, k)].conj() * h[(n, j)]).sum();
                acc += s.norm_sqr() * v[j];
            }
            assert!((obs.sigma[k] - acc / (hk * hk)).abs() < 1e-12);
        }
    }

    #[test]
    fn bso_excludes_own_prior() {
        let ch = draw_channel(6, 2, ChannelParams::rayleigh(), 0.0, 2).unwrap();
        let h = &ch.h;
        let y = CVector::from_fn(6, |i, _| c(0.1 * i as f64, 0.5));
        let prior = CVector::from_vec(vec![c(0.4, -0.2), c(-0.3, 0.6)]);
        let obs = bso_step(&y, h, &prior, &[1.0, 1.0], 0.1, false).unwrap();
        for k in 0..2 {
            let mut masked = prior.clone();
            masked[k] = c(0.0, 0.0);
            let r = &y - h * &masked;
            let num: C64 = (0..6).map(|n| h[(n, k)].conj() * r[n]).sum();
            let den: f64 = (0..6).map(|n| h[(n, k)].norm_sqr()).sum();
            assert!((obs.x_pic[k] - num / den).norm() < 1e-12);
        }
    }

    #[test]
    fn origin_gives_uniform_posterior() {
        let cons = Constellation::for_users(4, 2).unwrap();
        let out = bse_step(&CVector::zeros(1), &[0.7], &cons);
        assert!(out.mean[0].norm() < 1e-15);
        assert!((out.variance[0] - 0.5).abs() < 1e-15);
        for p in &out.posterior {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishing_variance_collapses_to_nearest_point() {
        let cons = Constellation::for_users(16, 1).unwrap();
        let target = cons.point(9);
        let x = CVector::from_element(1, target + c(0.01, -0.02));
        for s in [1e-9, 0.0] {
            let out = bse_step(&x, &[s], &cons);
            assert!((out.mean[0] - target).norm() < 1e-9);
            assert!(out.variance[0] < 1e-9);
        }
    }

    #[test]
    fn four_point_posterior_matches_direct_sum() {
        let cons = Constellation::for_users(4, 1).unwrap();
        let x = c(0.3, 0.1);
        let s = 0.5;
        let w: Vec<f64> = cons.points().iter().map(|a| (-(x - a).norm_sqr() / s).exp()).collect();
        let z: f64 = w.iter().sum();
        let mean: C64 = cons.points().iter().zip(&w).map(|(a, p)| a * (p / z)).sum();
        let var: f64 = cons.points().iter().zip(&w).map(|(a, p)| (a - mean).norm_sqr() * p / z).sum();
        let out = bse_step(&CVector::from_element(1, x), &[s], &cons);
        assert!((out.mean[0] - mean).norm() < 1e-14);
        assert!((out.variance[0] - var).abs() < 1e-14);
    }

    #[test]
    fn high_snr_posterior_does_not_underflow() {
        let cons = Constellation::for_users(64, 1).unwrap();
        let out = bse_step(&CVector::from_element(1, c(5.0, -5.0)), &[1e-6], &cons);
        let sum: f64 = out.posterior.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(out.mean[0].re.is_finite());
    }

    #[test]
    fn dsc_weights() {
        let a = CVector::from_element(1, c(1.0, 0.0));
        let b = CVector::from_element(1, c(0.0, 1.0));
        let even = dsc_step(&a, &[0.2], &b, &[0.4], &[3.0], &[3.0]);
        assert_eq!(even.rho, vec![0.5]);
        assert!((even.x[0] - c(0.5, 0.5)).norm() < 1e-15);
        assert!((even.v[0] - 0.3).abs() < 1e-15);
        assert!((dsc_step(&a, &[0.0], &b, &[0.0], &[1.0], &[2.0]).rho[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(dsc_step(&a, &[0.0], &b, &[0.0], &[0.0], &[2.0]).rho, vec![1.0]);
        assert_eq!(dsc_step(&a, &[0.0], &b, &[0.0], &[0.0], &[0.0]).rho, vec![1.0]);
    }

    #[test]
    fn error_vanishes_at_truth_and_equals_filtered_output_at_zero() {
        let ch = draw_channel(8, 2, ChannelParams::rayleigh(), 0.0, 6).unwrap();
        let x = CVector::from_vec(vec![c(0.5, 0.5), c(-0.5, 0.5)]);
        let y = &ch.h * &x;
        let w = matched_filter_rows(&ch.h).unwrap();
        let e = instantaneous_error(&y, &ch.h, &x, &w).unwrap();
        assert!(e.iter().all(|v| *v < 1e-28));
        let e0 = instantaneous_error(&y, &ch.h, &CVector::zeros(2), &w).unwrap();
        let mf = linear::matched_filter(&y, &ch.h).unwrap();
        for k in 0..2 {
            assert!((e0[k] - mf[k].norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn error_matches_direct_residual() {
        let ch = draw_channel(8, 2, ChannelParams::rayleigh(), 0.0, 16).unwrap();
        let h = &ch.h;
        let y = CVector::from_fn(8, |i, _| c((i as f64).cos(), 0.2));
        let xh = CVector::from_vec(vec![c(0.1, -0.4), c(0.3, 0.3)]);
        let w = matched_filter_rows(h).unwrap();
        let e = instantaneous_error(&y, h, &xh, &w).unwrap();
        for k in 0..2 {
            let mut acc = c(0.0, 0.0);
            let mut den = 0.0;
            for n in 0..8 {
                let r = y[n] - h[(n, 0)] * xh[0] - h[(n, 1)] * xh[1];
                acc += h[(n, k)].conj() * r;
                den += h[(n, k)].norm_sqr();
            }
            assert!((e[k] - (acc / den).norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn improved_variant_continues_with_the_basic_update() {
        // Seeding the basic loop with the MMSE prior and MMSE error rows must
        // reproduce the improved detector exactly.
        let ch = draw_channel(16, 6, ChannelParams::rayleigh(), 0.0, 31).unwrap();
        let cons = Constellation::for_users(4, 6).unwrap();
        let y = CVector::from_fn(16, |i, _| c((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()) * 0.5);
        let s2 = 0.2;
        let cfg = DetectorConfig {
            variant: Variant::IbPicDsc,
            trace: true,
            ..Default::default()
        };
        let ib = crate::detect::detect(&y, &ch.h, s2, &cons, &cfg).unwrap();
        let (w_h, _) = linear::mmse_filter(&ch.h, s2, &mut FlopCount::default()).unwrap();
        let setup = LoopSetup {
            prior: &w_h * &y,
            filter: ErrorFilter::Rows(w_h),
            estimator: Estimator::Bayesian,
            flops: FlopCount::default(),
        };
        let manual = run_pic_loop(&y, &ch.h, s2, &cons, &cfg, setup).unwrap();
        assert_eq!(ib.trace, manual.trace);
        assert_eq!(ib.hard_symbols, manual.hard_symbols);
    }
}
