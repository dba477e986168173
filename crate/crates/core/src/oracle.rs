//! Dense, structure-oblivious reference implementations.
//!
//! Everything here works on explicit `MN x MN` matrices and is only meant
//! for small frames: it is the ground truth the structured receiver is
//! tested against.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::channel::DdChannel;
use crate::error::{shape_err, Error, Result};
use crate::grid::{DdFrame, OtfsGrid};
use crate::modem::SchemeKind;

/// Largest frame for which the dense channel matrix is built.
pub const DENSE_CHANNEL_MAX_MN: usize = 4096;
/// Largest frame for which the dense LMMSE estimate is evaluated.
pub const DENSE_LMMSE_MAX_MN: usize = 1024;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(rhs.row(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "vector length differs");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add_scaled_identity(&mut self, c: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += c;
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product `self (x) rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Solves `self x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.rows;
        if self.cols != n || b.len() != n {
            return shape_err("solve needs a square matrix and matching right-hand side");
        }
        let mut a = self.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let (p, mag) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if mag == 0.0 {
                return Err(Error::Singular {
                    row: k,
                    magnitude: 0.0,
                    tolerance: 0.0,
                });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let inv = 1.0 / a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] * inv;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= l * t;
                }
                let t = x[k];
                x[i] -= l * t;
            }
        }
        for k in (0..n).rev() {
            let s: Complex64 = (k + 1..n).map(|j| a[(k, j)] * x[j]).sum();
            x[k] = (x[k] - s) / a[(k, k)];
        }
        Ok(x)
    }

    /// Doolittle LU without pivoting: unit lower `L` and upper `U`.
    pub fn lu_unpivoted(&self) -> Result<(DenseMatrix, DenseMatrix)> {
        let n = self.rows;
        if self.cols != n {
            return shape_err("LU needs a square matrix");
        }
        let mut u = self.clone();
        let mut l = DenseMatrix::identity(n);
        for k in 0..n {
            let piv = u[(k, k)];
            if piv.norm() == 0.0 {
                return Err(Error::Singular {
                    row: k,
                    magnitude: 0.0,
                    tolerance: 0.0,
                });
            }
            for i in k + 1..n {
                let f = u[(i, k)] / piv;
                l[(i, k)] = f;
                for j in k..n {
                    let t = u[(k, j)];
                    u[(i, j)] -= f * t;
                }
            }
        }
        Ok((l, u))
    }

    /// Forward substitution with a lower-triangular matrix.
    pub fn forward_substitute(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        for i in 0..self.rows {
            let s: Complex64 = (0..i).map(|j| self[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self[(i, i)];
        }
        x
    }

    /// Backward substitution with an upper-triangular matrix.
    pub fn backward_substitute(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.rows;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self[(i, i)];
        }
        x
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Unitary inverse DFT matrix `W_L`, entry `(a, b) = e^{j 2 pi a b / L} / sqrt(L)`.
pub fn unitary_idft(len: usize) -> DenseMatrix {
    let scale = 1.0 / (len as f64).sqrt();
    DenseMatrix::from_fn(len, len, |a, b| {
        Complex64::from_polar(scale, 2.0 * PI * ((a * b) % len) as f64 / len as f64)
    })
}

/// Cyclic delay matrix `Pi`: ones on the first sub-diagonal and in the top
/// right corner.
pub fn delay_matrix(mn: usize) -> DenseMatrix {
    DenseMatrix::from_fn(mn, mn, |i, j| {
        if i == (j + 1) % mn {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Doppler matrix `Delta = diag(e^{j 2 pi q / MN})`.
pub fn doppler_matrix(mn: usize) -> DenseMatrix {
    DenseMatrix::from_fn(mn, mn, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, 2.0 * PI * i as f64 / mn as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `Pi^l Delta^k` written entrywise: `(i, j)` is `e^{j 2 pi k j / MN}` when
/// `i = j + l (mod MN)` and zero elsewhere.
fn shift_ramp(mn: usize, l: usize, k: i64) -> impl Fn(usize, usize) -> Option<Complex64> {
    move |i, j| {
        if i == (j + l) % mn {
            let idx = (k * j as i64).rem_euclid(mn as i64);
            Some(Complex64::from_polar(
                1.0,
                2.0 * PI * idx as f64 / mn as f64,
            ))
        } else {
            None
        }
    }
}

/// Dense `H = sum_p h_p Pi^{l_p} Delta^{k_p}`.
pub fn dense_channel_matrix(ch: &DdChannel) -> Result<DenseMatrix> {
    let mn = ch.grid().mn();
    if mn > DENSE_CHANNEL_MAX_MN {
        return Err(Error::Resource(format!(
            "dense channel matrix for MN = {mn} exceeds the {DENSE_CHANNEL_MAX_MN} guard"
        )));
    }
    let mut h = DenseMatrix::zeros(mn, mn);
    for p in ch.paths() {
        let term = shift_ramp(mn, p.delay_bin, p.doppler_bin);
        for j in 0..mn {
            let i = (j + p.delay_bin) % mn;
            if let Some(v) = term(i, j) {
                h[(i, j)] += p.gain * v;
            }
        }
    }
    Ok(h)
}

/// Dense modulation matrix: `W_N (x) I_M` for OTFS, `I_N (x) W_M` for OFDM.
pub fn dense_modulation_matrix(kind: SchemeKind, grid: &OtfsGrid) -> DenseMatrix {
    match kind {
        SchemeKind::Otfs => unitary_idft(grid.n()).kron(&DenseMatrix::identity(grid.m())),
        SchemeKind::Ofdm => DenseMatrix::identity(grid.n()).kron(&unitary_idft(grid.m())),
    }
}

/// Dense `HH^H + nsr I`.
pub fn dense_psi(ch: &DdChannel, nsr: f64) -> Result<DenseMatrix> {
    let h = dense_channel_matrix(ch)?;
    let mut psi = h.matmul(&h.adjoint());
    psi.add_scaled_identity(nsr);
    Ok(psi)
}

/// LMMSE estimate `(HA)^H [(HA)(HA)^H + nsr I]^{-1} r` evaluated literally.
pub fn dense_lmmse(
    rx: &[Complex64],
    ch: &DdChannel,
    nsr: f64,
    kind: SchemeKind,
) -> Result<DdFrame> {
    let grid = *ch.grid();
    let mn = grid.mn();
    if mn > DENSE_LMMSE_MAX_MN {
        return Err(Error::Resource(format!(
            "dense LMMSE for MN = {mn} exceeds the {DENSE_LMMSE_MAX_MN} guard"
        )));
    }
    if rx.len() != mn {
        return shape_err(format!(
            "received vector has {} samples, expected {mn}",
            rx.len()
        ));
    }
    let ha = dense_channel_matrix(ch)?.matmul(&dense_modulation_matrix(kind, &grid));
    let ha_h = ha.adjoint();
    let mut gram = ha.matmul(&ha_h);
    gram.add_scaled_identity(nsr);
    let x = gram.solve(rx)?;
    DdFrame::from_vec(grid, &ha_h.matvec(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::DdPath;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(m: usize, n: usize) -> OtfsGrid {
        OtfsGrid::new(m, n, 1.0).unwrap()
    }

    fn mat_pow(a: &DenseMatrix, e: usize) -> DenseMatrix {
        (0..e).fold(DenseMatrix::identity(a.rows()), |acc, _| acc.matmul(a))
    }

    #[test]
    fn identity_path() {
        let ch = DdChannel::new(grid(2, 2), vec![DdPath::new(c(1.0, 0.0), 0, 0)]).unwrap();
        assert_eq!(dense_channel_matrix(&ch).unwrap(), DenseMatrix::identity(4));
    }

    #[test]
    fn unit_delay_is_down_shift() {
        let ch = DdChannel::new(grid(2, 2), vec![DdPath::new(c(1.0, 0.0), 1, 0)]).unwrap();
        let h = dense_channel_matrix(&ch).unwrap();
        assert_eq!(h, delay_matrix(4));
        assert_eq!(h[(1, 0)], c(1.0, 0.0));
        assert_eq!(h[(0, 3)], c(1.0, 0.0));
    }

    #[test]
    fn unit_doppler_at_mn_4() {
        let ch = DdChannel::new(grid(2, 2), vec![DdPath::new(c(1.0, 0.0), 0, 1)]).unwrap();
        let h = dense_channel_matrix(&ch).unwrap();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (i, e) in expect.iter().enumerate() {
            assert!((h[(i, i)] - e).norm() < 1e-15);
        }
    }

    #[test]
    fn entrywise_form_matches_matrix_powers() {
        let g = grid(4, 2);
        let paths = vec![
            DdPath::new(c(0.5, 0.2), 3, 1),
            DdPath::new(c(-0.1, 0.7), 1, -1),
            DdPath::new(c(0.3, 0.0), 0, 1),
        ];
        let ch = DdChannel::new(g, paths.clone()).unwrap();
        let pi = delay_matrix(8);
        let delta = doppler_matrix(8);
        let delta_inv = delta.adjoint();
        let mut h = DenseMatrix::zeros(8, 8);
        for p in &paths {
            let d = if p.doppler_bin >= 0 {
                mat_pow(&delta, p.doppler_bin as usize)
            } else {
                mat_pow(&delta_inv, p.doppler_bin.unsigned_abs() as usize)
            };
            let term = mat_pow(&pi, p.delay_bin).matmul(&d);
            for i in 0..8 {
                for j in 0..8 {
                    h[(i, j)] += p.gain * term[(i, j)];
                }
            }
        }
        assert!(dense_channel_matrix(&ch).unwrap().sub(&h).max_abs() < 1e-14);
    }

    #[test]
    fn modulation_matrices_are_unitary() {
        for (m, n) in [(4, 4), (8, 2), (2, 8), (8, 8)] {
            let g = grid(m, n);
            for kind in [SchemeKind::Otfs, SchemeKind::Ofdm] {
                let a = dense_modulation_matrix(kind, &g);
                let err = a
                    .matmul(&a.adjoint())
                    .sub(&DenseMatrix::identity(m * n))
                    .max_abs();
                assert!(err <= 1e-12, "{kind} {m}x{n}: {err}");
            }
        }
    }

    #[test]
    fn scalar_lmmse_closed_form() {
        let h = c(0.6, -0.8);
        let ch = DdChannel::new(grid(1, 1), vec![DdPath::new(h, 0, 0)]).unwrap();
        let r = c(0.3, 0.4);
        let nsr = 0.25;
        for kind in [SchemeKind::Otfs, SchemeKind::Ofdm] {
            let d = dense_lmmse(&[r], &ch, nsr, kind).unwrap();
            let expect = h.conj() * r / (h.norm_sqr() + nsr);
            assert!((d.get(0, 0) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_channel_inverts_modulation() {
        let g = grid(4, 4);
        let ch = DdChannel::new(g, vec![DdPath::new(c(1.0, 0.0), 0, 0)]).unwrap();
        let d: Vec<Complex64> = (0..16).map(|i| c(i as f64, -(i as f64) / 2.0)).collect();
        for kind in [SchemeKind::Otfs, SchemeKind::Ofdm] {
            let r = dense_modulation_matrix(kind, &g).matvec(&d);
            let est = dense_lmmse(&r, &ch, 1e-12, kind).unwrap().to_vec();
            for (a, b) in est.iter().zip(&d) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn gram_is_hermitian_and_solve_is_tight() {
        let g = grid(4, 4);
        let ch = DdChannel::new(
            g,
            vec![
                DdPath::new(c(0.7, 0.1), 0, 1),
                DdPath::new(c(0.2, -0.5), 2, -1),
            ],
        )
        .unwrap();
        let ha = dense_channel_matrix(&ch)
            .unwrap()
            .matmul(&dense_modulation_matrix(SchemeKind::Otfs, &g));
        let mut gram = ha.matmul(&ha.adjoint());
        gram.add_scaled_identity(0.1);
        assert!(gram.sub(&gram.adjoint()).max_abs() <= 1e-12);
        let b: Vec<Complex64> = (0..16)
            .map(|i| c((i as f64).cos(), (i as f64).sin()))
            .collect();
        let x = gram.solve(&b).unwrap();
        let res: f64 = gram
            .matvec(&x)
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(res / bn <= 1e-10);
    }

    #[test]
    fn size_guards() {
        let big = grid(64, 32);
        let ch = DdChannel::new(big, vec![DdPath::new(c(1.0, 0.0), 0, 0)]).unwrap();
        let r = vec![c(0.0, 0.0); big.mn()];
        assert!(matches!(
            dense_lmmse(&r, &ch, 0.1, SchemeKind::Otfs),
            Err(Error::Resource(_))
        ));
        let huge = grid(128, 64);
        let ch = DdChannel::new(huge, vec![DdPath::new(c(1.0, 0.0), 0, 0)]).unwrap();
        assert!(matches!(dense_channel_matrix(&ch), Err(Error::Resource(_))));
    }

    #[test]
    fn unpivoted_lu_reconstructs() {
        let a = DenseMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                c(4.0, 0.0)
            } else {
                c(
                    1.0 / (1.0 + i as f64 + j as f64),
                    0.1 * (i as f64 - j as f64),
                )
            }
        });
        let (l, u) = a.lu_unpivoted().unwrap();
        assert!(l.matmul(&u).sub(&a).max_abs() < 1e-13);
        let b: Vec<Complex64> = (0..5).map(|i| c(i as f64, 1.0)).collect();
        let x = u.backward_substitute(&l.forward_substitute(&b));
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-12);
        }
    }
}
