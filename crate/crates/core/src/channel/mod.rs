//! Discrete delay-Doppler channel `H = sum_p h_p Pi^{l_p} Delta^{k_p}`.
//!
//! `Pi` is the cyclic down-shift by one sample and `Delta` multiplies sample
//! `q` by `e^{j 2 pi q / MN}`. The operator and its adjoint are applied
//! path by path as shifts and phase ramps; `H` is never formed.

mod noise;
mod profile;

pub use noise::{add_awgn, add_awgn_with, NoiseModel};
pub use profile::{
    build_channel_from_profile, channel_lengths, draw_channel, max_doppler_hz, PowerDelayProfile,
    Tap, SPEED_OF_LIGHT,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::complexity::{CmTally, NoTally, Stage};
use crate::error::{config_err, shape_err, Result};
use crate::grid::OtfsGrid;

/// One propagation path on the delay-Doppler lattice.
///
/// `doppler_bin` is signed: negative Doppler is represented directly as a
/// negative exponent of `Delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdPath {
    pub gain: Complex64,
    pub delay_bin: usize,
    pub doppler_bin: i64,
}

impl DdPath {
    pub fn new(gain: Complex64, delay_bin: usize, doppler_bin: i64) -> Self {
        Self {
            gain,
            delay_bin,
            doppler_bin,
        }
    }
}

#[derive(Debug, Clone)]
struct DopplerGroup {
    doppler_bin: i64,
    taps: Vec<(Complex64, usize)>,
}

/// A frame-level channel realization with its delay length `alpha` and
/// Doppler length `beta`.
#[derive(Debug, Clone)]
pub struct DdChannel {
    grid: OtfsGrid,
    paths: Vec<DdPath>,
    alpha: usize,
    beta: usize,
    groups: Vec<DopplerGroup>,
    roots: Vec<Complex64>,
}

impl DdChannel {
    /// Channel whose lengths are the tightest ones covering `paths`.
    pub fn new(grid: OtfsGrid, paths: Vec<DdPath>) -> Result<Self> {
        Self::with_lengths(grid, paths, 0, 0)
    }

    /// Channel with declared lengths; each is raised to cover the paths if
    /// smaller than what the paths need.
    pub fn with_lengths(
        grid: OtfsGrid,
        paths: Vec<DdPath>,
        alpha: usize,
        beta: usize,
    ) -> Result<Self> {
        if paths.is_empty() {
            return config_err("channel needs at least one path");
        }
        for (i, p) in paths.iter().enumerate() {
            if p.delay_bin >= grid.m() {
                return config_err(format!(
                    "path {i}: delay bin {} outside [0, {}]",
                    p.delay_bin,
                    grid.m() - 1
                ));
            }
            if p.doppler_bin.unsigned_abs() >= grid.n() as u64 {
                return config_err(format!(
                    "path {i}: Doppler bin {} outside +/-{}",
                    p.doppler_bin,
                    grid.n() - 1
                ));
            }
            if !(p.gain.re.is_finite() && p.gain.im.is_finite()) {
                return config_err(format!("path {i}: gain is not finite"));
            }
        }
        let needed_alpha = paths.iter().map(|p| p.delay_bin).max().unwrap_or(0) + 1;
        let needed_beta = paths
            .iter()
            .map(|p| p.doppler_bin.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let alpha = alpha.max(needed_alpha);
        let beta = beta.max(needed_beta);
        let mn = grid.mn();
        if alpha > (mn / 2).max(1) {
            return config_err(format!(
                "channel delay length {alpha} exceeds MN/2 = {} (grid too small for this channel)",
                mn / 2
            ));
        }

        let mut by_doppler: BTreeMap<i64, Vec<(Complex64, usize)>> = BTreeMap::new();
        for p in &paths {
            by_doppler
                .entry(p.doppler_bin)
                .or_default()
                .push((p.gain, p.delay_bin));
        }
        let groups = by_doppler
            .into_iter()
            .map(|(doppler_bin, taps)| DopplerGroup { doppler_bin, taps })
            .collect();
        let roots = (0..mn)
            .map(|q| Complex64::from_polar(1.0, 2.0 * PI * q as f64 / mn as f64))
            .collect();
        Ok(Self {
            grid,
            paths,
            alpha,
            beta,
            groups,
            roots,
        })
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    pub fn paths(&self) -> &[DdPath] {
        &self.paths
    }

    /// Channel delay length; the band half-width of `HH^H` is `alpha - 1`.
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Channel Doppler length.
    pub fn beta(&self) -> usize {
        self.beta
    }

    /// `e^{j 2 pi k q / MN}` for any signed `k` and sample index `q`.
    #[inline]
    pub fn phase(&self, k: i64, q: i64) -> Complex64 {
        let mn = self.roots.len() as i64;
        self.roots[(k * q).rem_euclid(mn) as usize]
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.mn() {
            return shape_err(format!(
                "vector has {len} samples, channel expects {}",
                self.grid.mn()
            ));
        }
        Ok(())
    }
}

/// `H s`: per path, phase-ramp by `k_p` and cyclically delay by `l_p`.
pub fn apply_channel(s: &[Complex64], ch: &DdChannel) -> Result<Vec<Complex64>> {
    ch.check_len(s.len())?;
    let mn = s.len();
    let mut out = vec![Complex64::new(0.0, 0.0); mn];
    let mut ramped = vec![Complex64::new(0.0, 0.0); mn];
    for group in &ch.groups {
        let k = group.doppler_bin;
        let u: &[Complex64] = if k == 0 {
            s
        } else {
            for (q, (dst, &x)) in ramped.iter_mut().zip(s).enumerate() {
                *dst = x * ch.phase(k, q as i64);
            }
            &ramped
        };
        for &(h, l) in &group.taps {
            // out[q] += h u[q - l]
            for (dst, &x) in out[l..].iter_mut().zip(&u[..mn - l]) {
                *dst += h * x;
            }
            for (dst, &x) in out[..l].iter_mut().zip(&u[mn - l..]) {
                *dst += h * x;
            }
        }
    }
    Ok(out)
}

/// `H^H v`: per path, cyclically advance by `l_p`, ramp by `-k_p` and weight
/// by the conjugate gain.
pub fn apply_channel_adjoint(v: &[Complex64], ch: &DdChannel) -> Result<Vec<Complex64>> {
    apply_channel_adjoint_counted(v, ch, &mut NoTally)
}

/// [`apply_channel_adjoint`] with CM accounting. Paths sharing a Doppler bin
/// share one phase ramp, so the cost is `(P + distinct nonzero k) * MN`.
pub fn apply_channel_adjoint_counted(
    v: &[Complex64],
    ch: &DdChannel,
    tally: &mut impl CmTally,
) -> Result<Vec<Complex64>> {
    ch.check_len(v.len())?;
    let mn = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); mn];
    let mut acc = vec![Complex64::new(0.0, 0.0); mn];
    for group in &ch.groups {
        let k = group.doppler_bin;
        let target: &mut [Complex64] = if k == 0 { &mut out } else { &mut acc };
        if k != 0 {
            target.fill(Complex64::new(0.0, 0.0));
        }
        for &(h, l) in &group.taps {
            let hc = h.conj();
            // target[q] += conj(h) v[q + l]
            for (dst, &x) in target[..mn - l].iter_mut().zip(&v[l..]) {
                *dst += hc * x;
            }
            for (dst, &x) in target[mn - l..].iter_mut().zip(&v[..l]) {
                *dst += hc * x;
            }
            tally.add(Stage::Adjoint, mn as u64);
        }
        if k != 0 {
            for (q, (dst, &x)) in out.iter_mut().zip(&acc).enumerate() {
                *dst += x * ch.phase(-k, q as i64);
            }
            tally.add(Stage::Adjoint, mn as u64);
        }
    }
    Ok(out)
}

/// Linear time-varying channel acting on a CP-extended frame.
///
/// Sample `t` of the output is `sum_p h_p e^{j 2 pi k_p (t - cp - l_p)/MN}
/// x[t - l_p]`, with the Doppler phase referenced to the start of the frame
/// body and nothing arriving before `t = 0`.
pub fn apply_channel_linear(
    x_ext: &[Complex64],
    ch: &DdChannel,
    cp_len: usize,
) -> Result<Vec<Complex64>> {
    if x_ext.len() != ch.grid.mn() + cp_len {
        return shape_err(format!(
            "extended frame has {} samples, expected {}",
            x_ext.len(),
            ch.grid.mn() + cp_len
        ));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x_ext.len()];
    for p in &ch.paths {
        for t in p.delay_bin..x_ext.len() {
            let rel = t as i64 - cp_len as i64 - p.delay_bin as i64;
            y[t] += p.gain * ch.phase(p.doppler_bin, rel) * x_ext[t - p.delay_bin];
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{add_cp, remove_cp, CpConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(m: usize, n: usize) -> OtfsGrid {
        OtfsGrid::new(m, n, 15e3).unwrap()
    }

    fn test_vec(len: usize, salt: f64) -> Vec<Complex64> {
        (0..len)
            .map(|i| {
                c(
                    (i as f64 * 0.31 + salt).sin(),
                    (i as f64 * 0.17 - salt).cos(),
                )
            })
            .collect()
    }

    fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    }

    #[test]
    fn trivial_path_is_identity() {
        let ch = DdChannel::new(grid(4, 4), vec![DdPath::new(c(1.0, 0.0), 0, 0)]).unwrap();
        let s = test_vec(16, 0.0);
        assert_eq!(apply_channel(&s, &ch).unwrap(), s);
        assert_eq!(apply_channel_adjoint(&s, &ch).unwrap(), s);
    }

    #[test]
    fn unit_delay_rotates_down() {
        let ch = DdChannel::new(grid(2, 2), vec![DdPath::new(c(1.0, 0.0), 1, 0)]).unwrap();
        let s: Vec<Complex64> = (1..=4).map(|v| c(v as f64, 0.0)).collect();
        let y = apply_channel(&s, &ch).unwrap();
        let re: Vec<f64> = y.iter().map(|v| v.re).collect();
        assert_eq!(re, [4.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn adjoint_identity() {
        let ch = DdChannel::new(
            grid(8, 4),
            vec![
                DdPath::new(c(0.8, -0.3), 0, 1),
                DdPath::new(c(-0.2, 0.5), 2, -2),
                DdPath::new(c(0.1, 0.1), 3, 0),
                DdPath::new(c(0.4, 0.0), 3, -2),
            ],
        )
        .unwrap();
        let x = test_vec(32, 0.4);
        let y = test_vec(32, 1.9);
        let lhs = dot(&apply_channel(&x, &ch).unwrap(), &y);
        let rhs = dot(&x, &apply_channel_adjoint(&y, &ch).unwrap());
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn lengths_cover_paths() {
        let ch = DdChannel::new(
            grid(8, 8),
            vec![
                DdPath::new(c(1.0, 0.0), 3, -5),
                DdPath::new(c(1.0, 0.0), 1, 2),
            ],
        )
        .unwrap();
        assert_eq!((ch.alpha(), ch.beta()), (4, 5));
        let ch = DdChannel::with_lengths(*ch.grid(), ch.paths().to_vec(), 6, 7).unwrap();
        assert_eq!((ch.alpha(), ch.beta()), (6, 7));
    }

    #[test]
    fn invalid_channels_rejected() {
        let g = grid(4, 2);
        assert!(DdChannel::new(g, vec![]).is_err());
        assert!(DdChannel::new(g, vec![DdPath::new(c(1.0, 0.0), 4, 0)]).is_err());
        assert!(DdChannel::new(g, vec![DdPath::new(c(1.0, 0.0), 0, 2)]).is_err());
        // alpha = 5 > MN / 2 = 4
        assert!(DdChannel::with_lengths(g, vec![DdPath::new(c(1.0, 0.0), 0, 0)], 5, 0).is_err());
    }

    #[test]
    fn wrong_length_is_shape_error() {
        let ch = DdChannel::new(grid(4, 4), vec![DdPath::new(c(1.0, 0.0), 0, 0)]).unwrap();
        assert!(apply_channel(&[c(0.0, 0.0); 3], &ch).is_err());
        assert!(apply_channel_adjoint(&[c(0.0, 0.0); 17], &ch).is_err());
    }

    #[test]
    fn adjoint_cost_groups_by_doppler() {
        let ch = DdChannel::new(
            grid(8, 4),
            vec![
                DdPath::new(c(1.0, 0.0), 0, 1),
                DdPath::new(c(1.0, 0.0), 1, 1),
                DdPath::new(c(1.0, 0.0), 2, 0),
            ],
        )
        .unwrap();
        let mut tally = crate::complexity::CmCounter::new();
        apply_channel_adjoint_counted(&test_vec(32, 0.0), &ch, &mut tally).unwrap();
        assert_eq!(tally.get(Stage::Adjoint), (3 + 1) * 32);
    }

    /// Linear channel on the CP-extended frame, written out directly from the
    /// continuous-time picture: each path delays the transmitted sample stream
    /// and rotates it by its Doppler at the arrival time.
    fn linear_oracle(
        x_ext: &[Complex64],
        paths: &[DdPath],
        cp: usize,
        mn: usize,
    ) -> Vec<Complex64> {
        let mut y = vec![c(0.0, 0.0); x_ext.len()];
        for t in 0..x_ext.len() {
            for p in paths {
                if t < p.delay_bin {
                    continue;
                }
                let time = t as f64 - cp as f64 - p.delay_bin as f64;
                let rot =
                    Complex64::from_polar(1.0, 2.0 * PI * p.doppler_bin as f64 * time / mn as f64);
                y[t] += p.gain * rot * x_ext[t - p.delay_bin];
            }
        }
        y
    }

    #[test]
    fn cp_turns_linear_channel_into_cyclic() {
        let g = grid(4, 4);
        let paths = vec![
            DdPath::new(c(0.9, 0.1), 0, 1),
            DdPath::new(c(-0.3, 0.4), 2, -1),
            DdPath::new(c(0.2, -0.2), 3, 3),
        ];
        let ch = DdChannel::new(g, paths.clone()).unwrap();
        let cp = CpConfig::for_delay_length(ch.alpha());
        assert_eq!(cp.cp_len, 3);
        let s = test_vec(16, 0.7);
        let x_ext = add_cp(&s, cp).unwrap();
        let oracle = linear_oracle(&x_ext, &paths, cp.cp_len, 16);
        let fast = apply_channel_linear(&x_ext, &ch, cp.cp_len).unwrap();
        for (a, b) in fast.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
        let cyclic = apply_channel(&s, &ch).unwrap();
        let body = remove_cp(&oracle, cp).unwrap();
        for (a, b) in body.iter().zip(&cyclic) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }
}
