use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ReceiverKind, SimConfig};
use crate::channel::{
    add_awgn_with, apply_channel, apply_channel_linear, draw_channel, DdChannel, PowerDelayProfile,
};
use crate::equalizer::LmmseFastReceiver;
use crate::error::{Error, Result};
use crate::grid::{DdFrame, OtfsGrid};
use crate::modem::{add_cp, remove_cp, CpConfig, ModulationScheme};
use crate::oracle::dense_lmmse;
use crate::qam::{qam_demap_hard, qam_map, QamConstellation};

/// How the SNR axis is defined.
pub const SNR_CONVENTION: &str =
    "Es/N0 per QAM symbol (sigma_d^2 / sigma_n^2, sigma_d^2 = 1), CP energy excluded";

/// Channel redraws allowed per frame after a singular factorization.
const MAX_CHANNEL_DRAWS: usize = 8;

/// Noise draws come from their own stream so that every SNR point sees the
/// same unit-variance noise realization, only rescaled.
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub frames: u64,
}

impl BerPoint {
    /// Binomial standard error of `ber`.
    pub fn std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits_total as f64).sqrt()
    }
}

struct Sweep<'a> {
    cfg: &'a SimConfig,
    grid: OtfsGrid,
    profile: PowerDelayProfile,
    constellation: QamConstellation,
    modem: ModulationScheme,
}

impl Sweep<'_> {
    fn bits_per_frame(&self) -> usize {
        self.grid.mn() * self.constellation.bits_per_symbol()
    }

    /// Transmitted bits and hard decisions at every SNR point for one frame.
    fn run_frame(&self, frame_index: u64) -> Result<FrameDecisions> {
        let seed = self.cfg.seed ^ frame_index;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut last_err = None;
        for attempt in 0..MAX_CHANNEL_DRAWS {
            let ch = draw_channel(
                &self.profile,
                self.cfg.speed_mps(),
                self.cfg.carrier_hz(),
                &self.grid,
                &mut rng,
            )?;
            let bits: Vec<u8> = (0..self.bits_per_frame())
                .map(|_| rng.random::<bool>() as u8)
                .collect();
            match self.decide(&ch, &bits, seed) {
                Ok(decisions) => return Ok(FrameDecisions { bits, decisions }),
                Err(e @ Error::Singular { .. }) => {
                    log::warn!(
                        "frame {frame_index}: channel draw {attempt} is singular ({e}), redrawing"
                    );
                    last_err = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("at least one draw"))
    }

    fn decide(&self, ch: &DdChannel, bits: &[u8], seed: u64) -> Result<Vec<Vec<u8>>> {
        let symbols = qam_map(bits, &self.constellation)?;
        let frame = DdFrame::from_row_major(self.grid, symbols)?;
        let s = self.modem.modulate(&frame)?;
        let clean = if self.cfg.cyclic_prefix {
            let cp = CpConfig::for_delay_length(ch.alpha());
            remove_cp(&apply_channel_linear(&add_cp(&s, cp)?, ch, cp.cp_len)?, cp)?
        } else {
            apply_channel(&s, ch)?
        };
        let mut decisions = Vec::with_capacity(self.cfg.snr_db.len());
        for &snr_db in &self.cfg.snr_db {
            let sigma_sq = 10f64.powf(-snr_db / 10.0);
            let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
            noise_rng.set_stream(NOISE_STREAM);
            let r = add_awgn_with(&clean, sigma_sq, &mut noise_rng);
            let est = match self.cfg.receiver {
                ReceiverKind::Fast => {
                    LmmseFastReceiver::new(ch.clone(), sigma_sq, self.modem.kind())?.equalize(&r)?
                }
                ReceiverKind::Dense => dense_lmmse(&r, ch, sigma_sq, self.modem.kind())?,
            };
            decisions.push(qam_demap_hard(est.row_major(), &self.constellation));
        }
        Ok(decisions)
    }
}

/// One frame of a sweep: the transmitted bits and the receiver's hard
/// decisions, one vector per SNR point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameDecisions {
    pub bits: Vec<u8>,
    pub decisions: Vec<Vec<u8>>,
}

impl FrameDecisions {
    pub fn bit_errors(&self) -> Vec<u64> {
        self.decisions
            .iter()
            .map(|d| d.iter().zip(&self.bits).filter(|(a, b)| a != b).count() as u64)
            .collect()
    }
}

impl<'a> Sweep<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        Ok(Sweep {
            cfg,
            grid,
            profile: PowerDelayProfile::resolve(&cfg.profile)?,
            constellation: QamConstellation::new(cfg.qam)?,
            modem: ModulationScheme::new(cfg.scheme, grid),
        })
    }
}

/// Bits and decisions of frame `frame_index` of the sweep `cfg`, exactly as
/// [`run_ber_sweep`] computes them.
pub fn frame_decisions(cfg: &SimConfig, frame_index: u64) -> Result<FrameDecisions> {
    Sweep::new(cfg)?.run_frame(frame_index)
}

/// Runs the sweep described by `cfg`. Results depend only on `cfg`, not on
/// the number of workers.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<BerPoint>> {
    let sweep = Sweep::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Resource(format!("worker pool: {e}")))?;
    let per_frame: Vec<Vec<u64>> = pool.install(|| {
        (0..cfg.frames as u64)
            .into_par_iter()
            .map(|f| sweep.run_frame(f).map(|d| d.bit_errors()))
            .collect::<Result<_>>()
    })?;

    let frames = cfg.frames as u64;
    let bits_total = frames * sweep.bits_per_frame() as u64;
    let points = cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let bit_errors: u64 = per_frame.iter().map(|e| e[i]).sum();
            BerPoint {
                snr_db,
                bit_errors,
                bits_total,
                ber: bit_errors as f64 / bits_total as f64,
                frames,
            }
        })
        .collect();
    Ok(points)
}

/// CSV with header `snr_db,ber,bit_errors,bits_total,frames,receiver,scheme`.
pub fn write_ber_csv<W: Write>(points: &[BerPoint], cfg: &SimConfig, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "snr_db",
        "ber",
        "bit_errors",
        "bits_total",
        "frames",
        "receiver",
        "scheme",
    ])?;
    for p in points {
        out.write_record([
            p.snr_db.to_string(),
            format!("{:.6e}", p.ber),
            p.bit_errors.to_string(),
            p.bits_total.to_string(),
            p.frames.to_string(),
            cfg.receiver.to_string(),
            cfg.scheme.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
