use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{DdChannel, DdPath};
use crate::equalizer::LmmseFastReceiver;
use crate::error::Result;
use crate::grid::OtfsGrid;
use crate::modem::SchemeKind;
use crate::oracle::dense_lmmse;

/// `(M, N)` grids of the self-test: `MN` = 16, 64, 128.
pub const SELFTEST_GRIDS: [(usize, usize); 3] = [(4, 4), (8, 8), (16, 8)];
pub const SELFTEST_NSR: [f64; 3] = [1.0, 0.1, 0.01];
/// Relative-norm agreement required between fast and dense outputs.
pub const SELFTEST_TOLERANCE: f64 = 1e-8;

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * (var / 2.0).sqrt()
}

/// `paths` taps with unit-total-power Rayleigh gains, delay bins anywhere
/// in `0..M` and signed Doppler bins with `|k| < N`.
pub fn random_channel<R: Rng + ?Sized>(
    grid: OtfsGrid,
    paths: usize,
    rng: &mut R,
) -> Result<DdChannel> {
    let kmax = grid.n() as i64 - 1;
    let taps = (0..paths)
        .map(|_| {
            DdPath::new(
                complex_normal(rng, 1.0 / paths as f64),
                rng.random_range(0..grid.m()),
                rng.random_range(-kmax..=kmax),
            )
        })
        .collect();
    DdChannel::new(grid, taps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub instances: usize,
    pub max_rel_err: f64,
    /// Instances above [`SELFTEST_TOLERANCE`].
    pub failures: usize,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares the fast receiver with the dense LMMSE on `instances` random
/// channels and received vectors, cycling through grids, path counts 1..5,
/// noise ratios and both schemes.
pub fn run_selftest(instances: usize, seed: u64) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelftestReport {
        instances,
        max_rel_err: 0.0,
        failures: 0,
    };
    for i in 0..instances {
        let (m, n) = SELFTEST_GRIDS[i % SELFTEST_GRIDS.len()];
        let grid = OtfsGrid::new(m, n, 1.0)?;
        let paths = 1 + i % 5;
        let nsr = SELFTEST_NSR[(i / 5) % SELFTEST_NSR.len()];
        let scheme = if i % 2 == 0 {
            SchemeKind::Otfs
        } else {
            SchemeKind::Ofdm
        };
        let ch = random_channel(grid, paths, &mut rng)?;
        let rx: Vec<Complex64> = (0..grid.mn())
            .map(|_| complex_normal(&mut rng, 1.0))
            .collect();

        let fast = LmmseFastReceiver::new(ch.clone(), nsr, scheme)?.equalize(&rx)?;
        let dense = dense_lmmse(&rx, &ch, nsr, scheme)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in fast.row_major().iter().zip(dense.row_major()) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        let err = (num / den).sqrt();
        if err.is_nan() || err > SELFTEST_TOLERANCE {
            log::error!("instance {i}: M={m} N={n} P={paths} nsr={nsr} {scheme}: rel err {err:e}");
            report.failures += 1;
        }
        if err > report.max_rel_err || err.is_nan() {
            report.max_rel_err = err;
        }
    }
    Ok(report)
}
