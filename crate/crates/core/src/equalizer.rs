//! Two-stage LMMSE receiver: `r_ce = H^H Psi^{-1} r`, then the matched
//! filter of the chosen modulation.

use num_complex::Complex64;

use crate::channel::{apply_channel_adjoint_counted, DdChannel};
use crate::complexity::{CmTally, NoTally};
use crate::error::{config_err, Result};
use crate::grid::DdFrame;
use crate::modem::{ModulationScheme, SchemeKind};
use crate::qb::{assemble_psi, factor, solve_lower, solve_upper, PartitionedLU};

/// Noise-to-signal ratios below this (including zero) are raised to it so
/// that `Psi` stays positive definite.
pub const NSR_FLOOR: f64 = 1e-12;

/// LMMSE receiver for one channel realization. Factors once on
/// construction; [`equalize`](Self::equalize) is then a pure function of
/// the received vector.
#[derive(Debug, Clone)]
pub struct LmmseFastReceiver {
    channel: DdChannel,
    nsr: f64,
    lu: PartitionedLU,
    scheme: ModulationScheme,
}

impl LmmseFastReceiver {
    pub fn new(channel: DdChannel, nsr: f64, kind: SchemeKind) -> Result<Self> {
        Self::new_counted(channel, nsr, kind, &mut NoTally)
    }

    /// As [`new`](Self::new), charging assembly and factorization to `tally`.
    pub fn new_counted(
        channel: DdChannel,
        nsr: f64,
        kind: SchemeKind,
        tally: &mut impl CmTally,
    ) -> Result<Self> {
        if nsr.is_nan() || nsr < 0.0 || nsr.is_infinite() {
            return config_err(format!("nsr must be finite and non-negative, got {nsr}"));
        }
        let nsr = nsr.max(NSR_FLOOR);
        let psi = assemble_psi(&channel, nsr, tally)?;
        let lu = factor(&psi, tally)?;
        let scheme = ModulationScheme::new(kind, *channel.grid());
        Ok(Self {
            channel,
            nsr,
            lu,
            scheme,
        })
    }

    pub fn channel(&self) -> &DdChannel {
        &self.channel
    }

    /// The ratio actually used, after flooring.
    pub fn nsr(&self) -> f64 {
        self.nsr
    }

    pub fn factors(&self) -> &PartitionedLU {
        &self.lu
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme.kind()
    }

    pub fn equalize(&self, rx: &[Complex64]) -> Result<DdFrame> {
        self.equalize_counted(rx, &mut NoTally)
    }

    /// Channel equalization only: `H^H Psi^{-1} r`.
    pub fn channel_equalize(
        &self,
        rx: &[Complex64],
        tally: &mut impl CmTally,
    ) -> Result<Vec<Complex64>> {
        let r1 = solve_lower(&self.lu, rx, tally)?;
        let r2 = solve_upper(&self.lu, &r1, tally)?;
        apply_channel_adjoint_counted(&r2, &self.channel, tally)
    }

    pub fn equalize_counted(&self, rx: &[Complex64], tally: &mut impl CmTally) -> Result<DdFrame> {
        let r_ce = self.channel_equalize(rx, tally)?;
        self.scheme.demodulate(&r_ce, tally)
    }
}
