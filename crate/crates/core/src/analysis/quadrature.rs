//! Deterministic quadrature for expectations over Gaussian noise.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of an `n`-point Gauss rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Golub–Welsch: nodes are the eigenvalues of the symmetric tridiagonal
    /// Jacobi matrix, weights come from the first eigenvector components.
    pub fn new(n: usize) -> Self {
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            let k = i as f64;
            let b = k / (4.0 * k * k - 1.0).sqrt();
            jacobi[(i, i - 1)] = b;
            jacobi[(i - 1, i)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], 2.0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrise to remove eigensolver round-off.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Composite Gauss–Legendre rule for `E[f(Z)]`, `Z ~ N(0, s²)`, truncated
/// at `±RANGE·s` (the neglected mass is below 1e-38).
#[derive(Debug, Clone)]
pub struct NormalRule {
    /// Abscissae in units of the standard deviation.
    pub points: Vec<f64>,
    /// Weights including the Gaussian density; they sum to one.
    pub weights: Vec<f64>,
}

impl NormalRule {
    pub const RANGE: f64 = 13.0;

    pub fn new(panels_per_sigma: usize, order: usize) -> Self {
        let base = GaussLegendre::new(order);
        let panels = (2.0 * Self::RANGE) as usize * panels_per_sigma;
        let width = 2.0 * Self::RANGE / panels as f64;
        let mut points = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        for p in 0..panels {
            let mid = -Self::RANGE + (p as f64 + 0.5) * width;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                let z = mid + 0.5 * width * x;
                points.push(z);
                weights.push(0.5 * width * w * norm * (-0.5 * z * z).exp());
            }
        }
        Self { points, weights }
    }

    pub fn expect(&self, s: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(z, w)| w * f(s * z)).sum()
    }
}

/// Shared rule: two panels per standard deviation, 16 nodes each.
pub fn normal_rule() -> &'static NormalRule {
    static RULE: OnceLock<NormalRule> = OnceLock::new();
    RULE.get_or_init(|| NormalRule::new(2, 16))
}
