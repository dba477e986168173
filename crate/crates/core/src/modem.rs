//! OTFS and OFDM modulation with a rectangular pulse, plus cyclic prefix.
//!
//! With `d = vec(D)` the transmitted frame is `s = A d` where
//! `A = W_N (x) I_M` for OTFS and `A = I_N (x) W_M` for OFDM, `W_L` being the
//! unitary (1/sqrt(L) scaled) inverse DFT. Neither matrix is ever formed:
//! OTFS runs `M` length-`N` transforms along the rows of `D`, OFDM runs `N`
//! length-`M` transforms down its columns.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::complexity::{CmTally, NoTally, Stage};
use crate::error::{config_err, shape_err, Error, Result};
use crate::fft::{Direction, Radix2Fft};
use crate::grid::{unvec_columns, vec_columns, DdFrame, OtfsGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Otfs,
    Ofdm,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Otfs => "otfs",
            SchemeKind::Ofdm => "ofdm",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "otfs" => Ok(SchemeKind::Otfs),
            "ofdm" => Ok(SchemeKind::Ofdm),
            other => config_err(format!("unknown scheme '{other}' (expected otfs or ofdm)")),
        }
    }
}

/// A modulation scheme bound to a grid, with its FFT plans.
#[derive(Debug, Clone)]
pub struct ModulationScheme {
    kind: SchemeKind,
    grid: OtfsGrid,
    inverse: Radix2Fft,
    forward: Radix2Fft,
}

impl ModulationScheme {
    pub fn new(kind: SchemeKind, grid: OtfsGrid) -> Self {
        let len = match kind {
            SchemeKind::Otfs => grid.n(),
            SchemeKind::Ofdm => grid.m(),
        };
        Self {
            kind,
            grid,
            inverse: Radix2Fft::new(len, Direction::Inverse),
            forward: Radix2Fft::new(len, Direction::Forward),
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    /// `s = A vec(D)`.
    pub fn modulate(&self, frame: &DdFrame) -> Result<Vec<Complex64>> {
        if frame.grid() != &self.grid {
            return shape_err("frame grid does not match modulator grid");
        }
        let (m, n) = (self.grid.m(), self.grid.n());
        match self.kind {
            SchemeKind::Otfs => {
                let mut rows = frame.row_major().to_vec();
                let scale = 1.0 / (n as f64).sqrt();
                for row in rows.chunks_exact_mut(n) {
                    self.inverse.process(row, &mut NoTally, Stage::Demod);
                    row.iter_mut().for_each(|x| *x *= scale);
                }
                Ok(vec_columns(&rows, m, n))
            }
            SchemeKind::Ofdm => {
                let mut s = frame.to_vec();
                let scale = 1.0 / (m as f64).sqrt();
                for col in s.chunks_exact_mut(m) {
                    self.inverse.process(col, &mut NoTally, Stage::Demod);
                    col.iter_mut().for_each(|x| *x *= scale);
                }
                Ok(s)
            }
        }
    }

    /// Matched filter `A^H r`, returned as a delay-Doppler frame.
    pub fn demodulate(&self, r: &[Complex64], tally: &mut impl CmTally) -> Result<DdFrame> {
        let (m, n) = (self.grid.m(), self.grid.n());
        if r.len() != self.grid.mn() {
            return shape_err(format!(
                "received vector has {} samples, expected {}",
                r.len(),
                m * n
            ));
        }
        match self.kind {
            SchemeKind::Otfs => {
                let mut rows = unvec_columns(r, m, n);
                let scale = 1.0 / (n as f64).sqrt();
                for row in rows.chunks_exact_mut(n) {
                    self.forward.process(row, tally, Stage::Demod);
                    row.iter_mut().for_each(|x| *x *= scale);
                }
                DdFrame::from_row_major(self.grid, rows)
            }
            SchemeKind::Ofdm => {
                let mut d = r.to_vec();
                let scale = 1.0 / (m as f64).sqrt();
                for col in d.chunks_exact_mut(m) {
                    self.forward.process(col, tally, Stage::Demod);
                    col.iter_mut().for_each(|x| *x *= scale);
                }
                DdFrame::from_vec(self.grid, &d)
            }
        }
    }
}

pub fn otfs_modulate(frame: &DdFrame) -> Result<Vec<Complex64>> {
    ModulationScheme::new(SchemeKind::Otfs, *frame.grid()).modulate(frame)
}

pub fn otfs_demodulate_mf(r_ce: &[Complex64], grid: OtfsGrid) -> Result<DdFrame> {
    ModulationScheme::new(SchemeKind::Otfs, grid).demodulate(r_ce, &mut NoTally)
}

pub fn ofdm_modulate(frame: &DdFrame) -> Result<Vec<Complex64>> {
    ModulationScheme::new(SchemeKind::Ofdm, *frame.grid()).modulate(frame)
}

pub fn ofdm_demodulate(r_ce: &[Complex64], grid: OtfsGrid) -> Result<DdFrame> {
    ModulationScheme::new(SchemeKind::Ofdm, grid).demodulate(r_ce, &mut NoTally)
}

/// Cyclic prefix length in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpConfig {
    pub cp_len: usize,
}

impl CpConfig {
    /// Shortest prefix that absorbs a channel of delay length `alpha`.
    pub fn for_delay_length(alpha: usize) -> Self {
        Self {
            cp_len: alpha.saturating_sub(1),
        }
    }
}

/// Prepends the last `cp_len` samples of `s`.
pub fn add_cp(s: &[Complex64], cp: CpConfig) -> Result<Vec<Complex64>> {
    if cp.cp_len > s.len() {
        return config_err(format!(
            "CP length {} exceeds frame length {}",
            cp.cp_len,
            s.len()
        ));
    }
    let mut out = Vec::with_capacity(s.len() + cp.cp_len);
    out.extend_from_slice(&s[s.len() - cp.cp_len..]);
    out.extend_from_slice(s);
    Ok(out)
}

/// Drops the first `cp_len` samples.
pub fn remove_cp(x: &[Complex64], cp: CpConfig) -> Result<Vec<Complex64>> {
    if cp.cp_len > x.len() {
        return config_err(format!(
            "CP length {} exceeds received length {}",
            cp.cp_len,
            x.len()
        ));
    }
    Ok(x[cp.cp_len..].to_vec())
}
