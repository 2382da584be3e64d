//! Maximum-likelihood detection.

use nalgebra::{DMatrix, DVector};

use crate::model::Constellation;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest search space the exhaustive oracle agrees to enumerate.
pub const ML_SEARCH_LIMIT: u128 = 1 << 20;

fn search_space(order: usize, users: usize) -> u128 {
    (order as u128).checked_pow(users as u32).unwrap_or(u128::MAX)
}

/// Exhaustive minimiser of `‖y − Hx‖²` over all `M^K` label vectors.
///
/// The residual is updated incrementally as an odometer walks the candidates,
/// so each candidate costs O(N).
pub fn ml_oracle(y: &CVector, h: &CMatrix, constellation: &Constellation) -> Result<Vec<usize>> {
    let (n, k) = h.shape();
    if y.len() != n {
        return Err(Error::Shape(format!("y has {} entries, H has {n} rows", y.len())));
    }
    let m = constellation.order();
    let space = search_space(m, k);
    if space > ML_SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge(space));
    }
    let points = constellation.points();
    let mut labels = vec![0usize; k];
    let mut residual = y - h * CVector::from_element(k, points[0]);
    let mut best = labels.clone();
    let mut best_d = residual.norm_squared();
    for _ in 1..space {
        // Advance the odometer and patch the residual for every digit changed.
        for (digit, label) in labels.iter_mut().enumerate() {
            let old = *label;
            *label = (old + 1) % m;
            let delta = points[*label] - points[old];
            residual.axpy(-delta, &h.column(digit), C64::new(1.0, 0.0));
            if *label != 0 {
                break;
            }
        }
        let d = residual.norm_squared();
        if d < best_d {
            best_d = d;
            best.copy_from_slice(&labels);
        }
    }
    Ok(best)
}

/// Exact ML detection by depth-first sphere decoding on the real-valued
/// model, with Schnorr–Euchner ordering and radius shrinking.
///
/// Returns the same minimiser as [`ml_oracle`] without the search-space
/// limit; its running time is data dependent and grows quickly at low SNR
/// for many users.
pub fn sphere_decode(y: &CVector, h: &CMatrix, constellation: &Constellation) -> Result<Vec<usize>> {
    let (n, k) = h.shape();
    if y.len() != n {
        return Err(Error::Shape(format!("y has {} entries, H has {n} rows", y.len())));
    }
    let p = 2 * k;
    let hr = DMatrix::from_fn(2 * n, p, |i, j| {
        let v = h[(i % n, j % k)];
        match (i < n, j < k) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    });
    let yr = DVector::from_fn(2 * n, |i, _| if i < n { y[i].re } else { y[i - n].im });
    let qr = hr.qr();
    let r = qr.r();
    let z = qr.q().tr_mul(&yr);
    if (0..p).any(|i| r[(i, i)].abs() < 1e-300) {
        return Err(Error::Singular);
    }

    let levels = constellation.axis_levels();
    let mut search = Search {
        r: &r,
        z: &z,
        levels,
        current: vec![0; p],
        value: vec![0.0; p],
        best: vec![0; p],
        best_d: f64::INFINITY,
    };
    search.descend(p, 0.0);
    let best = search.best;
    Ok((0..k).map(|u| constellation.label_from_axes(best[u], best[k + u])).collect())
}

struct Search<'a> {
    r: &'a DMatrix<f64>,
    z: &'a DVector<f64>,
    levels: &'a [f64],
    current: Vec<usize>,
    value: Vec<f64>,
    best: Vec<usize>,
    best_d: f64,
}

impl Search<'_> {
    /// Explores level `depth - 1` given the partial distance of the levels
    /// above it.
    fn descend(&mut self, depth: usize, partial: f64) {
        if depth == 0 {
            if partial < self.best_d {
                self.best_d = partial;
                self.best.copy_from_slice(&self.current);
            }
            return;
        }
        let i = depth - 1;
        let p = self.current.len();
        let rii = self.r[(i, i)];
        let mut acc = self.z[i];
        for j in i + 1..p {
            acc -= self.r[(i, j)] * self.value[j];
        }
        let center = acc / rii;
        let mut order: Vec<usize> = (0..self.levels.len()).collect();
        order.sort_by(|&a, &b| {
            (self.levels[a] - center)
                .abs()
                .total_cmp(&(self.levels[b] - center).abs())
                .then(a.cmp(&b))
        });
        for idx in order {
            let diff = rii * (self.levels[idx] - center);
            let d = partial + diff * diff;
            if d >= self.best_d {
                // Candidates are visited by increasing distance, so the rest
                // of this level is outside the sphere as well.
                break;
            }
            self.current[i] = idx;
            self.value[i] = self.levels[idx];
            self.descend(i, d);
        }
    }
}
