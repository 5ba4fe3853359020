//! Gray-coded square QAM with unit average symbol energy.
//!
//! A symbol label has `2m` bits: the upper `m` bits select the in-phase
//! level and the lower `m` bits the quadrature level. Per axis, the Gray
//! decoded value `g` maps to amplitude `(√M − 1 − 2g)·scale`, so for QPSK the
//! label `00` is `(1 + j)/√2` and for 16-QAM the per-axis table is
//! `00 → +3, 01 → +1, 11 → −1, 10 → −3` (times `1/√10`).

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    /// Indexed by label.
    points: Vec<Complex64>,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl Constellation {
    /// Square QAM of the given order (4, 16, 64, ...).
    pub fn qam(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros() as usize;
        if order < 4 || !order.is_power_of_two() || bits % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "modulation order {order} is not a square power of two"
            )));
        }
        let half = bits / 2;
        let side = 1usize << half;
        let mask = side - 1;
        // Mean energy of the unscaled ±1, ±3, ... grid is 2(M − 1)/3.
        let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let level = |g: usize| ((side - 1) as f64 - 2.0 * gray_decode(g) as f64) * scale;
        let points = (0..order)
            .map(|label| Complex64::new(level(label >> half), level(label & mask)))
            .collect();
        Ok(Self {
            order,
            bits_per_symbol: bits,
            points,
        })
    }

    /// An arbitrary labelled constellation; `points[i]` carries label `i`.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        let order = points.len();
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "constellation size {order} is not a power of two"
            )));
        }
        Ok(Self {
            order,
            bits_per_symbol: order.trailing_zeros() as usize,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Label of the nearest point; ties go to the lowest label.
    pub fn nearest_label(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Label of a point that is exactly in the constellation.
    pub fn label_of(&self, point: Complex64) -> Option<usize> {
        self.points.iter().position(|&p| p == point)
    }
}

/// Maps bits (MSB first within each symbol) to constellation points.
pub fn qam_map(bits: &[u8], constellation: &Constellation) -> Result<Vec<Complex64>> {
    let k = constellation.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::BitLength {
            len: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits
        .chunks(k)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
            constellation.point(label)
        })
        .collect())
}

/// Inverse of [`qam_map`] on exact constellation points. Off-grid inputs are
/// mapped through the nearest point.
pub fn qam_demap(symbols: &[Complex64], constellation: &Constellation) -> Vec<u8> {
    let k = constellation.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for &s in symbols {
        let label = constellation
            .label_of(s)
            .unwrap_or_else(|| constellation.nearest_label(s));
        bits.extend((0..k).rev().map(|i| ((label >> i) & 1) as u8));
    }
    bits
}
