//! Frame geometry and delay-Doppler data frames.

use num_complex::Complex64;

use crate::error::{config_err, shape_err, Result};

/// OTFS frame geometry: `m` subcarriers by `n` time slots at spacing `delta_f`.
///
/// The grid is critically sampled, so the symbol duration is `1 / delta_f`.
/// Both dimensions must be powers of two so every transform is radix-2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtfsGrid {
    m: usize,
    n: usize,
    delta_f: f64,
}

impl OtfsGrid {
    pub fn new(m: usize, n: usize, delta_f: f64) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() {
            return config_err(format!("M = {m} must be a power of two"));
        }
        if n == 0 || !n.is_power_of_two() {
            return config_err(format!("N = {n} must be a power of two"));
        }
        if !(delta_f.is_finite() && delta_f > 0.0) {
            return config_err(format!("subcarrier spacing {delta_f} must be positive"));
        }
        Ok(Self { m, n, delta_f })
    }

    /// Subcarriers (delay bins).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Time slots (Doppler bins).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    /// Symbol duration `T = 1 / delta_f`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// Total bandwidth `M * delta_f`.
    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.delta_f
    }

    /// Frame duration `N * T`.
    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.symbol_duration()
    }

    /// Samples per frame, `M * N`.
    pub fn mn(&self) -> usize {
        self.m * self.n
    }
}

/// An `M x N` block of delay-Doppler symbols.
///
/// Row `l` is delay bin `l`, column `k` is Doppler bin `k`. Storage is
/// row-major so that per-delay transforms run over contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct DdFrame {
    grid: OtfsGrid,
    data: Vec<Complex64>,
}

impl DdFrame {
    pub fn zeros(grid: OtfsGrid) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.mn()],
        }
    }

    /// Builds a frame from row-major `M x N` data.
    pub fn from_row_major(grid: OtfsGrid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.mn() {
            return shape_err(format!(
                "frame data has {} entries, grid needs {}",
                data.len(),
                grid.mn()
            ));
        }
        Ok(Self { grid, data })
    }

    /// Builds a frame from `d = vec(D)`.
    pub fn from_vec(grid: OtfsGrid, d: &[Complex64]) -> Result<Self> {
        if d.len() != grid.mn() {
            return shape_err(format!(
                "vector has {} entries, grid needs {}",
                d.len(),
                grid.mn()
            ));
        }
        Ok(Self {
            grid,
            data: unvec_columns(d, grid.m(), grid.n()),
        })
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    /// Entry at delay bin `l`, Doppler bin `k`.
    pub fn get(&self, l: usize, k: usize) -> Complex64 {
        self.data[l * self.grid.n() + k]
    }

    pub fn set(&mut self, l: usize, k: usize, value: Complex64) {
        let n = self.grid.n();
        self.data[l * n + k] = value;
    }

    pub fn row_major(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row_major_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Column-stacked data vector `d = vec(D)`.
    pub fn to_vec(&self) -> Vec<Complex64> {
        vec_columns(&self.data, self.grid.m(), self.grid.n())
    }
}

/// Stacks the columns of a row-major `rows x cols` matrix: output index
/// `r + rows * c` holds entry `(r, c)`.
pub fn vec_columns<T: Copy>(row_major: &[T], rows: usize, cols: usize) -> Vec<T> {
    assert_eq!(row_major.len(), rows * cols, "matrix size mismatch");
    let mut out = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        out.extend((0..rows).map(|r| row_major[r * cols + c]));
    }
    out
}

/// Inverse of [`vec_columns`]: reshapes a column-stacked vector into a
/// row-major `rows x cols` matrix.
pub fn unvec_columns<T: Copy>(v: &[T], rows: usize, cols: usize) -> Vec<T> {
    assert_eq!(v.len(), rows * cols, "vector length mismatch");
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        out.extend((0..cols).map(|c| v[r + rows * c]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_derived_quantities() {
        let g = OtfsGrid::new(512, 128, 15e3).unwrap();
        assert_eq!(g.symbol_duration() * g.delta_f(), 1.0);
        assert_eq!(g.bandwidth(), 512.0 * 15e3);
        assert!((g.frame_duration() - 128.0 / 15e3).abs() < 1e-15);
        assert_eq!(g.mn(), 65536);
    }

    #[test]
    fn grid_rejects_non_power_of_two() {
        assert!(OtfsGrid::new(12, 4, 1.0).is_err());
        assert!(OtfsGrid::new(4, 0, 1.0).is_err());
        assert!(OtfsGrid::new(4, 4, 0.0).is_err());
    }

    #[test]
    fn column_stacking_of_2x2() {
        // [[a, c], [b, d]] row-major is [a, c, b, d]
        let x = [c(1.0), c(3.0), c(2.0), c(4.0)];
        assert_eq!(vec_columns(&x, 2, 2), vec![c(1.0), c(2.0), c(3.0), c(4.0)]);
    }

    #[test]
    fn reshape_puts_sample_m_at_row_0_column_1() {
        let (m, n) = (4, 3);
        let r: Vec<usize> = (0..m * n).collect();
        let mat = unvec_columns(&r, m, n);
        assert_eq!(mat[1], m);
        assert_eq!(mat[n], 1);
    }

    #[test]
    fn frame_vec_round_trip() {
        let g = OtfsGrid::new(4, 2, 1.0).unwrap();
        let mut f = DdFrame::zeros(g);
        f.set(3, 1, c(7.0));
        let d = f.to_vec();
        assert_eq!(d[3 + 4], c(7.0));
        assert_eq!(DdFrame::from_vec(g, &d).unwrap(), f);
    }

    proptest! {
        #[test]
        fn unvec_inverts_vec(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>()) {
            let x: Vec<u64> = (0..rows * cols).map(|i| seed.wrapping_mul(i as u64 + 1)).collect();
            prop_assert_eq!(unvec_columns(&vec_columns(&x, rows, cols), rows, cols), x);
        }
    }
}
