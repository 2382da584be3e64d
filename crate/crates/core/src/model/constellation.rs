use crate::{Error, Result, C64};

/// Square Gray-mapped M-QAM constellation scaled to a per-symbol energy.
///
/// Labels are `m`-bit integers read MSB first. The first `m/2` bits select the
/// in-phase level and the remaining bits the quadrature level, each through a
/// reflected Gray code, so horizontally or vertically adjacent points differ in
/// exactly one bit. Bit value 0 on an axis with two levels maps to the negative
/// amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    energy: f64,
    half_spacing: f64,
    points: Vec<C64>,
    /// `levels[i]` is the axis amplitude with natural index `i` (ascending).
    levels: Vec<f64>,
    /// `axis_label[i]` is the Gray label of axis level `i`.
    axis_label: Vec<usize>,
    /// `subsets[q][b]` holds the point indices whose bit `q` equals `b`.
    subsets: Vec<[Vec<usize>; 2]>,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    g >>= 1;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

impl Constellation {
    /// Constellation for `users` transmitters sharing unit total energy, so
    /// each point set has average energy `1/users`.
    pub fn for_users(order: usize, users: usize) -> Result<Self> {
        if users == 0 {
            return Err(Error::InvalidParameter("user count must be at least 1".into()));
        }
        Self::with_energy(order, 1.0 / users as f64)
    }

    pub fn with_energy(order: usize, energy: f64) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::UnsupportedOrder(order));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidParameter(format!("symbol energy {energy}")));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let axis_bits = bits_per_symbol / 2;
        let side = 1usize << axis_bits;
        // Average energy of a square QAM with spacing 2a is 2a^2 (M-1)/3.
        let half_spacing = (3.0 * energy / (2.0 * (order as f64 - 1.0))).sqrt();
        let levels: Vec<f64> = (0..side)
            .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) * half_spacing)
            .collect();
        let mut axis_label = vec![0; side];
        for g in 0..side {
            axis_label[gray_decode(g)] = g;
        }
        let points: Vec<C64> = (0..order)
            .map(|label| {
                let i = gray_decode(label >> axis_bits);
                let q = gray_decode(label & (side - 1));
                C64::new(levels[i], levels[q])
            })
            .collect();
        let subsets = (0..bits_per_symbol)
            .map(|q| {
                let shift = bits_per_symbol - 1 - q;
                let zeros = (0..order).filter(|l| (l >> shift) & 1 == 0).collect();
                let ones = (0..order).filter(|l| (l >> shift) & 1 == 1).collect();
                [zeros, ones]
            })
            .collect();
        Ok(Self {
            order,
            bits_per_symbol,
            energy,
            half_spacing,
            points,
            levels,
            axis_label,
            subsets,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Average symbol energy E_s.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Half the minimum distance between points (the amplitude `a`).
    pub fn half_spacing(&self) -> f64 {
        self.half_spacing
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> C64 {
        self.points[label]
    }

    /// Ascending per-axis amplitudes.
    pub fn axis_levels(&self) -> &[f64] {
        &self.levels
    }

    /// Index sets of the points whose bit `q` (0-based, MSB first) is 0 and 1.
    pub fn bit_subsets(&self, q: usize) -> &[Vec<usize>; 2] {
        &self.subsets[q]
    }

    /// Bit `q` (MSB first) of point `label`.
    pub fn bit(&self, label: usize, q: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - q)) & 1) as u8
    }

    /// Label built from `m` bits, MSB first.
    pub fn label_from_bits(&self, bits: &[u8]) -> usize {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    pub fn write_bits(&self, label: usize, out: &mut [u8]) {
        for (q, slot) in out.iter_mut().enumerate().take(self.bits_per_symbol) {
            *slot = self.bit(label, q);
        }
    }

    pub fn modulate(&self, bits: &[u8]) -> C64 {
        self.points[self.label_from_bits(bits)]
    }

    /// Label of the point with in-phase level index `i` and quadrature level
    /// index `q` (indices into [`Self::axis_levels`]).
    pub fn label_from_axes(&self, i: usize, q: usize) -> usize {
        let axis_bits = self.bits_per_symbol / 2;
        (self.axis_label[i] << axis_bits) | self.axis_label[q]
    }

    /// Nearest point; equidistant candidates resolve to the lowest label.
    pub fn nearest(&self, x: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (x - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    pub fn max_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max)
    }
}
