use num_complex::Complex64;

use crate::channel::DdChannel;
use crate::complexity::{CmTally, Stage};
use crate::error::{config_err, shape_err, Result};
use crate::oracle::DenseMatrix;

/// Cyclically banded square matrix in diagonal-packed storage.
///
/// Row `q` stores the `2 theta + 1` entries `(q, (q + o) mod n)` for
/// `o = -theta..=theta` at `band[q * (2 theta + 1) + theta + o]`. Entries
/// with a larger cyclic offset are structurally zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiBandedMatrix {
    size: usize,
    half_bw: usize,
    band: Vec<Complex64>,
    hermitian: bool,
}

impl QuasiBandedMatrix {
    /// Requires `2 * half_bw < size` so that every cyclic offset has its own slot.
    pub fn zeros(size: usize, half_bw: usize) -> Result<Self> {
        if size == 0 || (half_bw > 0 && 2 * half_bw >= size) {
            return config_err(format!(
                "half bandwidth {half_bw} too large for a {size} x {size} quasi-banded matrix"
            ));
        }
        Ok(Self {
            size,
            half_bw,
            band: vec![Complex64::new(0.0, 0.0); size * (2 * half_bw + 1)],
            hermitian: false,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `theta`: the largest cyclic offset that may hold a nonzero.
    pub fn half_bw(&self) -> usize {
        self.half_bw
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn set_hermitian(&mut self, hermitian: bool) {
        self.hermitian = hermitian;
    }

    fn width(&self) -> usize {
        2 * self.half_bw + 1
    }

    /// Cyclic offset `o` in `[-theta, theta]` with `j = (i + o) mod n`, if any.
    pub fn offset_of(&self, i: usize, j: usize) -> Option<isize> {
        let n = self.size;
        let d = (j + n - i) % n;
        if d <= self.half_bw {
            Some(d as isize)
        } else if n - d <= self.half_bw {
            Some(-((n - d) as isize))
        } else {
            None
        }
    }

    /// Entry `(q, (q + o) mod n)`.
    #[inline]
    pub fn band_entry(&self, q: usize, o: isize) -> Complex64 {
        self.band[q * self.width() + (self.half_bw as isize + o) as usize]
    }

    #[inline]
    pub fn band_entry_mut(&mut self, q: usize, o: isize) -> &mut Complex64 {
        let w = self.width();
        &mut self.band[q * w + (self.half_bw as isize + o) as usize]
    }

    /// Entry `(i, j)`; zero outside the cyclic band.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.offset_of(i, j) {
            Some(o) => self.band_entry(i, o),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.band.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|A(i,j) - conj(A(j,i))|` over the band.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let t = self.half_bw as isize;
        for q in 0..self.size {
            for o in -t..=t {
                let j = (q as isize + o).rem_euclid(self.size as isize) as usize;
                let a = self.band_entry(q, o);
                let b = self.band_entry(j, -o);
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.size {
            return shape_err(format!(
                "vector has {} entries, matrix is {}",
                x.len(),
                self.size
            ));
        }
        let t = self.half_bw as isize;
        let n = self.size as isize;
        Ok((0..self.size)
            .map(|q| {
                (-t..=t)
                    .map(|o| self.band_entry(q, o) * x[(q as isize + o).rem_euclid(n) as usize])
                    .sum()
            })
            .collect())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.size, self.size);
        let t = self.half_bw as isize;
        for q in 0..self.size {
            for o in -t..=t {
                let j = (q as isize + o).rem_euclid(self.size as isize) as usize;
                d[(q, j)] = self.band_entry(q, o);
            }
        }
        d
    }
}

/// Assembles `HH^H + nsr I` exactly from the path list.
///
/// The pair `(p, s)` contributes `h_p conj(h_s) e^{j 2 pi (k_p - k_s)(q - l_p) / MN}`
/// to entry `(q, q + l_s - l_p)` of every row `q`, so all contributions sit
/// within cyclic offset `alpha - 1` of the diagonal.
pub fn assemble_psi(
    ch: &DdChannel,
    nsr: f64,
    tally: &mut impl CmTally,
) -> Result<QuasiBandedMatrix> {
    if !(nsr.is_finite() && nsr > 0.0) {
        return config_err(format!(
            "noise-to-signal ratio {nsr} must be positive and finite"
        ));
    }
    let mn = ch.grid().mn();
    let theta = ch.alpha() - 1;
    let mut psi = QuasiBandedMatrix::zeros(mn, theta)?;
    let paths = ch.paths();
    for p in paths {
        for s in paths {
            let w = p.gain * s.gain.conj();
            tally.add(Stage::Assemble, 1);
            let o = s.delay_bin as isize - p.delay_bin as isize;
            let dk = p.doppler_bin - s.doppler_bin;
            if dk == 0 {
                for q in 0..mn {
                    *psi.band_entry_mut(q, o) += w;
                }
            } else {
                let lp = p.delay_bin as i64;
                for q in 0..mn {
                    *psi.band_entry_mut(q, o) += w * ch.phase(dk, q as i64 - lp);
                }
                tally.add(Stage::Assemble, mn as u64);
            }
        }
    }
    for q in 0..mn {
        *psi.band_entry_mut(q, 0) += nsr;
    }
    psi.set_hermitian(true);
    Ok(psi)
}
