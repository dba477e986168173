//! Iterative radix-2 FFT with per-butterfly CM counting.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::complexity::{CmTally, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `e^{-j 2 pi k n / L}` kernel.
    Forward,
    /// `e^{+j 2 pi k n / L}` kernel.
    Inverse,
}

/// Unnormalised radix-2 transform of a fixed power-of-two length.
#[derive(Debug, Clone)]
pub struct Radix2Fft {
    len: usize,
    log2_len: u32,
    twiddles: Vec<Complex64>,
}

impl Radix2Fft {
    /// Panics if `len` is not a power of two.
    pub fn new(len: usize, direction: Direction) -> Self {
        assert!(
            len.is_power_of_two(),
            "FFT length {len} is not a power of two"
        );
        let sign = match direction {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        Self {
            len,
            log2_len: len.trailing_zeros(),
            twiddles,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// CMs per transform: one twiddle product per butterfly.
    pub fn cms(&self) -> u64 {
        (self.len as u64 / 2) * self.log2_len as u64
    }

    /// Transforms `buf` in place and charges `len/2 * log2(len)` CMs to `stage`.
    pub fn process(&self, buf: &mut [Complex64], tally: &mut impl CmTally, stage: Stage) {
        assert_eq!(buf.len(), self.len);
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = self.log2_len;
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let t = w * buf[start + k + half];
                    let u = buf[start + k];
                    buf[start + k] = u + t;
                    buf[start + k + half] = u - t;
                }
            }
            half *= 2;
        }
        tally.add(stage, self.cms());
    }
}
