use num_complex::Complex64;

use super::QuasiBandedMatrix;
use crate::complexity::{CmTally, Stage};
use crate::error::{shape_err, Error, Result};
use crate::oracle::DenseMatrix;

/// Pivots smaller than this times `max |Psi|` are treated as singular.
pub const PIVOT_RTOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// How the `V` strip is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripRoute {
    /// Row-wise substitution `V Uc = S`; works for any matrix.
    Substitution,
    /// For Hermitian input `Uc = D Lc^H` and `S = B^H`, so
    /// `V = E^H D^{-1}` with no further solve.
    Adjoint,
}

/// Block LU factors of a quasi-banded matrix.
///
/// `L = [[Lc, 0], [V, F]]` and `U = [[Uc, E], [0, G]]` with `Lc`, `F` unit
/// lower triangular. `Lc` and `Uc` share one packed `Q x (2 theta + 1)`
/// band array (multipliers below the diagonal, `Uc` on and above it); `F`
/// and `G` share one dense `theta x theta` array the same way.
#[derive(Debug, Clone)]
pub struct PartitionedLU {
    size: usize,
    half_bw: usize,
    core_len: usize,
    core: Vec<Complex64>,
    inv_diag: Vec<Complex64>,
    e: Vec<Complex64>,
    v: Vec<Complex64>,
    corner: Vec<Complex64>,
}

struct Pivot {
    tolerance: f64,
}

impl Pivot {
    fn check(&self, row: usize, pivot: Complex64) -> Result<Complex64> {
        let magnitude = pivot.norm();
        if magnitude == 0.0 || magnitude < self.tolerance || !magnitude.is_finite() {
            return Err(Error::Singular {
                row,
                magnitude,
                tolerance: self.tolerance,
            });
        }
        Ok(ONE / pivot)
    }
}

/// Factors a quasi-banded matrix, taking the adjoint shortcut for `V` when
/// the matrix is flagged Hermitian.
pub fn factor(psi: &QuasiBandedMatrix, tally: &mut impl CmTally) -> Result<PartitionedLU> {
    let route = if psi.is_hermitian() {
        StripRoute::Adjoint
    } else {
        StripRoute::Substitution
    };
    factor_with_route(psi, route, tally)
}

/// Unpivoted block LU of `psi`.
///
/// Fails with [`Error::Singular`] on any pivot below
/// `PIVOT_RTOL * max |psi|`. [`StripRoute::Adjoint`] is only valid for
/// Hermitian input.
pub fn factor_with_route(
    psi: &QuasiBandedMatrix,
    route: StripRoute,
    tally: &mut impl CmTally,
) -> Result<PartitionedLU> {
    let n = psi.size();
    let theta = psi.half_bw();
    let q_len = n - theta;
    let w = 2 * theta + 1;
    let t = theta as isize;
    let pivot = Pivot {
        tolerance: PIVOT_RTOL * psi.max_abs(),
    };
    let mut inv_diag = vec![ZERO; n];

    // Banded core T = Lc Uc. No cyclic entries fall inside T.
    let mut core = vec![ZERO; q_len * w];
    for i in 0..q_len {
        for o in -t..=t {
            let j = i as isize + o;
            if j >= 0 && (j as usize) < q_len {
                core[i * w + (t + o) as usize] = psi.band_entry(i, o);
            }
        }
    }
    for k in 0..q_len {
        let inv = pivot.check(k, core[k * w + theta])?;
        inv_diag[k] = inv;
        let reach = theta.min(q_len - 1 - k);
        for i in k + 1..=k + reach {
            let lk = i * w + theta - (i - k);
            let l = core[lk] * inv;
            core[lk] = l;
            for j in k + 1..=k + reach {
                let u = core[k * w + theta + (j - k)];
                core[i * w + theta + j - i] -= l * u;
            }
        }
        tally.add(Stage::FactorCore, (1 + reach + reach * reach) as u64);
    }

    let mut lu = PartitionedLU {
        size: n,
        half_bw: theta,
        core_len: q_len,
        core,
        inv_diag,
        e: vec![ZERO; q_len * theta],
        v: vec![ZERO; theta * q_len],
        corner: vec![ZERO; theta * theta],
    };
    if theta == 0 {
        return Ok(lu);
    }

    // E = Lc^{-1} B. B is nonzero only in its first and last theta rows.
    for i in 0..q_len {
        let reach = i.min(theta);
        for c in 0..theta {
            let mut acc = if i < theta || i >= q_len - theta {
                psi.get(i, q_len + c)
            } else {
                ZERO
            };
            for d in 1..=reach {
                acc -= lu.core[i * w + theta - d] * lu.e[(i - d) * theta + c];
            }
            lu.e[i * theta + c] = acc;
        }
        tally.add(Stage::Strips, (reach * theta) as u64);
    }

    // V = S Uc^{-1}
    match route {
        StripRoute::Adjoint => {
            for a in 0..theta {
                for j in 0..q_len {
                    lu.v[a * q_len + j] = lu.e[j * theta + a].conj() * lu.inv_diag[j];
                }
            }
            tally.add(Stage::Strips, (theta * q_len) as u64);
        }
        StripRoute::Substitution => {
            for a in 0..theta {
                let row = q_len + a;
                for j in 0..q_len {
                    let reach = j.min(theta);
                    let mut acc = if j < theta || j >= q_len - theta {
                        psi.get(row, j)
                    } else {
                        ZERO
                    };
                    for d in 1..=reach {
                        acc -= lu.v[a * q_len + j - d] * lu.core[(j - d) * w + theta + d];
                    }
                    lu.v[a * q_len + j] = acc * lu.inv_diag[j];
                    tally.add(Stage::Strips, (reach + 1) as u64);
                }
            }
        }
    }

    // Schur block C - V E, then F G = C - V E.
    for a in 0..theta {
        for b in 0..theta {
            let mut acc = psi.get(q_len + a, q_len + b);
            for j in 0..q_len {
                acc -= lu.v[a * q_len + j] * lu.e[j * theta + b];
            }
            lu.corner[a * theta + b] = acc;
        }
    }
    tally.add(Stage::Schur, (theta * theta * q_len) as u64);
    for k in 0..theta {
        let inv = pivot.check(q_len + k, lu.corner[k * theta + k])?;
        lu.inv_diag[q_len + k] = inv;
        let reach = theta - 1 - k;
        for i in k + 1..theta {
            let l = lu.corner[i * theta + k] * inv;
            lu.corner[i * theta + k] = l;
            for j in k + 1..theta {
                let u = lu.corner[k * theta + j];
                lu.corner[i * theta + j] -= l * u;
            }
        }
        tally.add(Stage::Schur, (1 + reach + reach * reach) as u64);
    }
    Ok(lu)
}

impl PartitionedLU {
    /// `MN`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `theta = alpha - 1`.
    pub fn half_bw(&self) -> usize {
        self.half_bw
    }

    /// `Q = MN - theta`.
    pub fn core_len(&self) -> usize {
        self.core_len
    }

    fn width(&self) -> usize {
        2 * self.half_bw + 1
    }

    /// `Lc(i, j)`, zero outside the lower band, one on the diagonal.
    pub fn l_core(&self, i: usize, j: usize) -> Complex64 {
        match i.checked_sub(j) {
            Some(0) => ONE,
            Some(d) if d <= self.half_bw => self.core[i * self.width() + self.half_bw - d],
            _ => ZERO,
        }
    }

    /// `Uc(i, j)`, zero outside the upper band.
    pub fn u_core(&self, i: usize, j: usize) -> Complex64 {
        match j.checked_sub(i) {
            Some(d) if d <= self.half_bw => self.core[i * self.width() + self.half_bw + d],
            _ => ZERO,
        }
    }

    /// `E(i, c)` for `i < Q`, `c < theta`.
    pub fn e(&self, i: usize, c: usize) -> Complex64 {
        self.e[i * self.half_bw + c]
    }

    /// `V(a, j)` for `a < theta`, `j < Q`.
    pub fn v(&self, a: usize, j: usize) -> Complex64 {
        self.v[a * self.core_len + j]
    }

    /// `F(a, b)`, unit lower triangular.
    pub fn f(&self, a: usize, b: usize) -> Complex64 {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => ONE,
            std::cmp::Ordering::Greater => self.corner[a * self.half_bw + b],
            std::cmp::Ordering::Less => ZERO,
        }
    }

    /// `G(a, b)`, upper triangular.
    pub fn g(&self, a: usize, b: usize) -> Complex64 {
        if a <= b {
            self.corner[a * self.half_bw + b]
        } else {
            ZERO
        }
    }

    /// Assembles the full `L` and `U` densely.
    pub fn to_dense(&self) -> (DenseMatrix, DenseMatrix) {
        let (n, q, t) = (self.size, self.core_len, self.half_bw);
        let mut l = DenseMatrix::zeros(n, n);
        let mut u = DenseMatrix::zeros(n, n);
        for i in 0..q {
            for j in i.saturating_sub(t)..=i {
                l[(i, j)] = self.l_core(i, j);
            }
            for j in i..(i + t + 1).min(q) {
                u[(i, j)] = self.u_core(i, j);
            }
            for c in 0..t {
                u[(i, q + c)] = self.e(i, c);
            }
        }
        for a in 0..t {
            for j in 0..q {
                l[(q + a, j)] = self.v(a, j);
            }
            for b in 0..t {
                l[(q + a, q + b)] = self.f(a, b);
                u[(q + a, q + b)] = self.g(a, b);
            }
        }
        (l, u)
    }

    /// `Psi^{-1} b` as [`solve_upper`] after [`solve_lower`].
    pub fn solve(&self, b: &[Complex64], tally: &mut impl CmTally) -> Result<Vec<Complex64>> {
        let r1 = solve_lower(self, b, tally)?;
        solve_upper(self, &r1, tally)
    }
}

/// `r1 = L^{-1} r`: banded forward substitution over the core rows, then
/// the trailing rows through the dense `V` strip and unit-lower `F`.
pub fn solve_lower(
    lu: &PartitionedLU,
    r: &[Complex64],
    tally: &mut impl CmTally,
) -> Result<Vec<Complex64>> {
    if r.len() != lu.size {
        return shape_err(format!(
            "right-hand side has {} entries, expected {}",
            r.len(),
            lu.size
        ));
    }
    let (q, t, w) = (lu.core_len, lu.half_bw, lu.width());
    let mut x = r.to_vec();
    let mut cms = 0u64;
    for i in 0..q {
        let reach = i.min(t);
        let row = &lu.core[i * w + t - reach..i * w + t];
        let mut acc = x[i];
        for (l, &xj) in row.iter().zip(&x[i - reach..i]) {
            acc -= l * xj;
        }
        x[i] = acc;
        cms += reach as u64;
    }
    for a in 0..t {
        let mut acc = x[q + a];
        for (v, &xj) in lu.v[a * q..(a + 1) * q].iter().zip(&x[..q]) {
            acc -= v * xj;
        }
        for b in 0..a {
            acc -= lu.corner[a * t + b] * x[q + b];
        }
        x[q + a] = acc;
        cms += (q + a) as u64;
    }
    tally.add(Stage::SolveLower, cms);
    Ok(x)
}

/// `r2 = U^{-1} r1`: the trailing `theta` unknowns through `G` first, then
/// a descending sweep over the core rows using the `Uc` band and each row's
/// `E` coupling to the trailing unknowns.
pub fn solve_upper(
    lu: &PartitionedLU,
    r1: &[Complex64],
    tally: &mut impl CmTally,
) -> Result<Vec<Complex64>> {
    if r1.len() != lu.size {
        return shape_err(format!(
            "right-hand side has {} entries, expected {}",
            r1.len(),
            lu.size
        ));
    }
    let (q, t, w) = (lu.core_len, lu.half_bw, lu.width());
    let mut x = r1.to_vec();
    let mut cms = 0u64;
    for a in (0..t).rev() {
        let mut acc = x[q + a];
        for b in a + 1..t {
            acc -= lu.corner[a * t + b] * x[q + b];
        }
        x[q + a] = acc * lu.inv_diag[q + a];
        cms += (t - a) as u64;
    }
    let (head, tail) = x.split_at_mut(q);
    for i in (0..q).rev() {
        let reach = t.min(q - 1 - i);
        let mut acc = head[i];
        let band = &lu.core[i * w + t + 1..i * w + t + 1 + reach];
        for (u, &xj) in band.iter().zip(&head[i + 1..i + 1 + reach]) {
            acc -= u * xj;
        }
        for (e, &xj) in lu.e[i * t..(i + 1) * t].iter().zip(tail.iter()) {
            acc -= e * xj;
        }
        head[i] = acc * lu.inv_diag[i];
        cms += (reach + t + 1) as u64;
    }
    tally.add(Stage::SolveUpper, cms);
    Ok(x)
}
