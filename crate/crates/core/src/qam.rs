//! Gray-labelled square QAM with unit average energy.

use num_complex::Complex64;

use crate::error::{config_err, shape_err, Result};

/// A square QAM constellation (4, 16 or 64 points) normalised to unit
/// average symbol energy.
///
/// Labels are `bits_per_symbol` bits, most significant first. The upper half
/// of the label selects the quadrature level, the lower half the in-phase
/// level; each half is a Gray-coded PAM index with label 0 at the most
/// positive amplitude. For 4-QAM this gives 00 in the first quadrant and
/// 01, 11, 10 walking counter-clockwise.
#[derive(Debug, Clone)]
pub struct QamConstellation {
    order: usize,
    bits_per_symbol: usize,
    side: usize,
    scale: f64,
    points: Vec<Complex64>,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        let bits_per_symbol = match order {
            4 => 2,
            16 => 4,
            64 => 6,
            _ => return config_err(format!("unsupported QAM order {order} (use 4, 16 or 64)")),
        };
        let side = 1usize << (bits_per_symbol / 2);
        // mean |x|^2 over the odd-integer grid is 2 (L^2 - 1) / 3
        let energy = 2.0 * ((side * side) as f64 - 1.0) / 3.0;
        let scale = 1.0 / energy.sqrt();
        let half = bits_per_symbol / 2;
        let mask = (1usize << half) - 1;
        let points = (0..order)
            .map(|label| {
                let q = pam_level(label >> half, side);
                let i = pam_level(label & mask, side);
                Complex64::new(i, q) * scale
            })
            .collect();
        Ok(Self {
            order,
            bits_per_symbol,
            side,
            scale,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Constellation points indexed by their bit label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Bit label of the point nearest to `symbol`.
    ///
    /// On a square grid the nearest point decomposes into independent
    /// nearest levels on each axis.
    pub fn nearest_label(&self, symbol: Complex64) -> usize {
        let half = self.bits_per_symbol / 2;
        let i = self.slice_axis(symbol.re);
        let q = self.slice_axis(symbol.im);
        (q << half) | i
    }

    fn slice_axis(&self, x: f64) -> usize {
        // level index j has amplitude (L - 1) - 2 j on the unscaled grid
        let l = self.side as f64;
        let idx = (((l - 1.0) - x / self.scale) / 2.0).round();
        let idx = idx.clamp(0.0, l - 1.0) as usize;
        gray_encode(idx)
    }
}

fn gray_encode(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

fn pam_level(gray: usize, side: usize) -> f64 {
    (side as f64 - 1.0) - 2.0 * gray_decode(gray) as f64
}

/// Maps a bit sequence (one bit per byte, 0 or 1) onto constellation points.
pub fn qam_map(bits: &[u8], constellation: &QamConstellation) -> Result<Vec<Complex64>> {
    let k = constellation.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return shape_err(format!(
            "{} bits do not divide into {k}-bit QAM labels",
            bits.len()
        ));
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b != 0));
            constellation.points[label]
        })
        .collect())
}

/// Hard-decision demapping to the label of the nearest constellation point.
pub fn qam_demap_hard(symbols: &[Complex64], constellation: &QamConstellation) -> Vec<u8> {
    let k = constellation.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for &s in symbols {
        let label = constellation.nearest_label(s);
        bits.extend((0..k).rev().map(|b| ((label >> b) & 1) as u8));
    }
    bits
}
