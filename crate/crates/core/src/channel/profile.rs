//! Power-delay profiles and random channel draws with Jakes Doppler.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DdChannel, DdPath};
use crate::error::{config_err, Error, Result};
use crate::grid::OtfsGrid;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const EVA: &str = include_str!("../../profiles/eva.pdp");
const EVB: &str = include_str!("../../profiles/evb.pdp");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    pub power_db: f64,
}

/// Tapped power-delay profile.
///
/// Text form: one tap per line, `delay_ns power_dB`, whitespace separated;
/// `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    pub name: String,
    pub taps: Vec<Tap>,
}

impl PowerDelayProfile {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut taps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                source_name: name.to_string(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(format!(
                    "expected 'delay_ns power_dB', got '{line}'"
                )));
            }
            let delay_ns: f64 = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad delay '{}'", fields[0])))?;
            let power_db: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad power '{}'", fields[1])))?;
            if !(delay_ns.is_finite() && delay_ns >= 0.0 && power_db.is_finite()) {
                return Err(parse_err(format!("tap out of range: '{line}'")));
            }
            taps.push(Tap {
                delay_s: delay_ns * 1e-9,
                power_db,
            });
        }
        if taps.is_empty() {
            return config_err(format!("profile '{name}' has no taps"));
        }
        Ok(Self {
            name: name.to_string(),
            taps,
        })
    }

    /// Bundled `eva` (9 taps) or `evb` (6 taps).
    pub fn builtin(name: &str) -> Option<Self> {
        let text = match name.to_ascii_lowercase().as_str() {
            "eva" => EVA,
            "evb" => EVB,
            _ => return None,
        };
        Some(Self::parse(name, text).expect("bundled profile parses"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&path.display().to_string(), &text)
    }

    /// A bundled profile name, or else a path to a profile file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match Self::builtin(name_or_path) {
            Some(p) => Ok(p),
            None => Self::load(Path::new(name_or_path)),
        }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn max_delay(&self) -> f64 {
        self.taps.iter().map(|t| t.delay_s).fold(0.0, f64::max)
    }

    /// Linear tap powers scaled to unit sum.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self
            .taps
            .iter()
            .map(|t| 10f64.powf(t.power_db / 10.0))
            .collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }
}

/// Maximum Doppler shift `f_c v / c`.
pub fn max_doppler_hz(speed_mps: f64, carrier_hz: f64) -> f64 {
    carrier_hz * speed_mps / SPEED_OF_LIGHT
}

fn ceil_bins(x: f64) -> usize {
    // absorb rounding noise in products that are integers on paper
    (x - 1e-9).ceil().max(0.0) as usize
}

/// `(alpha, beta) = (ceil(tau_max M delta_f), ceil(nu_max N T))`, with
/// `alpha` at least 1.
pub fn channel_lengths(grid: &OtfsGrid, tau_max: f64, nu_max: f64) -> (usize, usize) {
    let alpha = ceil_bins(tau_max * grid.bandwidth()).max(1);
    let beta = ceil_bins(nu_max * grid.frame_duration());
    (alpha, beta)
}

/// Draws one channel realization: Rayleigh tap gains with the profile's
/// normalised powers, delays rounded to the nearest delay bin, and Jakes
/// Doppler `nu_max cos(theta)` rounded to the nearest signed Doppler bin.
pub fn draw_channel<R: Rng + ?Sized>(
    profile: &PowerDelayProfile,
    speed_mps: f64,
    carrier_hz: f64,
    grid: &OtfsGrid,
    rng: &mut R,
) -> Result<DdChannel> {
    if !(speed_mps.is_finite() && speed_mps >= 0.0) {
        return config_err(format!("speed {speed_mps} m/s must be >= 0"));
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return config_err(format!(
            "carrier frequency {carrier_hz} Hz must be positive"
        ));
    }
    let nu_max = max_doppler_hz(speed_mps, carrier_hz);
    let (alpha, beta) = channel_lengths(grid, profile.max_delay(), nu_max);
    if alpha > (grid.mn() / 2).max(1) {
        return config_err(format!(
            "profile '{}' needs delay length {alpha}, more than MN/2 = {} for M={}, N={}",
            profile.name,
            grid.mn() / 2,
            grid.m(),
            grid.n()
        ));
    }
    let powers = profile.normalized_powers();
    let mut paths = Vec::with_capacity(powers.len());
    for (tap, power) in profile.taps.iter().zip(powers) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let gain = Complex64::new(re, im) * (power / 2.0).sqrt();
        let angle = rng.random_range(-PI..PI);
        let doppler_bin = (nu_max * angle.cos() * grid.frame_duration()).round() as i64;
        let delay_bin = (tap.delay_s * grid.bandwidth()).round() as usize;
        if delay_bin >= grid.m() {
            return config_err(format!(
                "tap at {:.0} ns lands in delay bin {delay_bin}, beyond M-1 = {}",
                tap.delay_s * 1e9,
                grid.m() - 1
            ));
        }
        paths.push(DdPath::new(gain, delay_bin, doppler_bin));
    }
    DdChannel::with_lengths(*grid, paths, alpha, beta)
}

/// Seeded form of [`draw_channel`].
pub fn build_channel_from_profile(
    profile: &PowerDelayProfile,
    speed_mps: f64,
    carrier_hz: f64,
    grid: &OtfsGrid,
    seed: u64,
) -> Result<DdChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_channel(profile, speed_mps, carrier_hz, grid, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kmh(v: f64) -> f64 {
        v / 3.6
    }

    #[test]
    fn bundled_profiles() {
        let eva = PowerDelayProfile::builtin("EVA").unwrap();
        assert_eq!(eva.len(), 9);
        assert!((eva.max_delay() - 2.51e-6).abs() < 1e-15);
        let evb = PowerDelayProfile::builtin("evb").unwrap();
        assert_eq!(evb.len(), 6);
        assert!((evb.max_delay() - 20e-6).abs() < 1e-15);
        assert!(PowerDelayProfile::builtin("tdl-c").is_none());
    }

    #[test]
    fn normalized_power_sums_to_one() {
        for name in ["eva", "evb"] {
            let p = PowerDelayProfile::builtin(name).unwrap();
            let direct: f64 = p.taps.iter().map(|t| 10f64.powf(t.power_db / 10.0)).sum();
            let sum: f64 = p
                .taps
                .iter()
                .map(|t| 10f64.powf(t.power_db / 10.0) / direct)
                .sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!((p.normalized_powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eva_geometry_at_table_scale() {
        let grid = OtfsGrid::new(512, 128, 15e3).unwrap();
        let nu = max_doppler_hz(kmh(500.0), 4e9);
        assert_eq!(channel_lengths(&grid, 2.51e-6, nu), (20, 16));
        let eva = PowerDelayProfile::builtin("eva").unwrap();
        let ch = build_channel_from_profile(&eva, kmh(500.0), 4e9, &grid, 3).unwrap();
        assert_eq!((ch.alpha(), ch.beta()), (20, 16));
        assert_eq!(ch.paths().len(), 9);
        assert!(ch.paths().iter().all(|p| p.doppler_bin.abs() <= 16));
    }

    #[test]
    fn static_channel_has_no_doppler() {
        let grid = OtfsGrid::new(64, 32, 15e3).unwrap();
        let eva = PowerDelayProfile::builtin("eva").unwrap();
        let ch = build_channel_from_profile(&eva, 0.0, 4e9, &grid, 11).unwrap();
        assert!(ch.paths().iter().all(|p| p.doppler_bin == 0));
        assert_eq!(ch.beta(), 0);
    }

    #[test]
    fn draws_are_seeded() {
        let grid = OtfsGrid::new(64, 32, 15e3).unwrap();
        let eva = PowerDelayProfile::builtin("eva").unwrap();
        let a = build_channel_from_profile(&eva, kmh(500.0), 4e9, &grid, 5).unwrap();
        let b = build_channel_from_profile(&eva, kmh(500.0), 4e9, &grid, 5).unwrap();
        assert_eq!(a.paths(), b.paths());
    }

    #[test]
    fn mean_gain_power_follows_profile() {
        let grid = OtfsGrid::new(64, 32, 15e3).unwrap();
        let eva = PowerDelayProfile::builtin("eva").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trials = 4000;
        let mut total = 0.0;
        for _ in 0..trials {
            let ch = draw_channel(&eva, kmh(120.0), 4e9, &grid, &mut rng).unwrap();
            total += ch.paths().iter().map(|p| p.gain.norm_sqr()).sum::<f64>();
        }
        let mean = total / trials as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn grid_too_small_for_profile() {
        // 20 us at 480 kHz is 10 delay bins, MN / 2 = 4
        let grid = OtfsGrid::new(4, 2, 120e3).unwrap();
        let evb = PowerDelayProfile::builtin("evb").unwrap();
        assert!(matches!(
            build_channel_from_profile(&evb, 10.0, 4e9, &grid, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn parse_errors_report_line() {
        let err = PowerDelayProfile::parse("x", "# header\n0 0\n10 abc\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(PowerDelayProfile::parse("x", "# nothing\n").is_err());
    }
}
