//! Complex-multiplication (CM) accounting.
//!
//! Kernels take a `&mut impl CmTally`. Passing [`NoTally`] monomorphises
//! every count away; passing a [`CmCounter`] records per-stage tallies that
//! [`audit_run`] compares with the closed-form operation counts.
//!
//! Only complex-by-complex products count. Divisions count as one CM,
//! scaling by a real constant and multiplying by a known unit diagonal do
//! not count.

use std::fmt;
use std::io::Write;

use crate::error::{config_err, Result};
use crate::modem::SchemeKind;

/// Receiver pipeline stages with their own tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Assemble,
    FactorCore,
    Strips,
    Schur,
    SolveLower,
    SolveUpper,
    Adjoint,
    Demod,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Assemble,
        Stage::FactorCore,
        Stage::Strips,
        Stage::Schur,
        Stage::SolveLower,
        Stage::SolveUpper,
        Stage::Adjoint,
        Stage::Demod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Assemble => "assemble",
            Stage::FactorCore => "factor_core",
            Stage::Strips => "strips",
            Stage::Schur => "schur",
            Stage::SolveLower => "solve_lower",
            Stage::SolveUpper => "solve_upper",
            Stage::Adjoint => "adjoint",
            Stage::Demod => "demod",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Sink for CM counts.
pub trait CmTally {
    fn add(&mut self, stage: Stage, cms: u64);
}

/// Discards all counts.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTally;

impl CmTally for NoTally {
    #[inline(always)]
    fn add(&mut self, _stage: Stage, _cms: u64) {}
}

/// Per-stage CM ledger.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CmCounter {
    counts: [u64; 8],
}

impl CmTally for CmCounter {
    #[inline]
    fn add(&mut self, stage: Stage, cms: u64) {
        self.counts[stage.index()] += cms;
    }
}

impl CmCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, stage: Stage) -> u64 {
        self.counts[stage.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sum of the factorization stages (core LU, strips and Schur block).
    pub fn factor_total(&self) -> u64 {
        self.get(Stage::FactorCore) + self.get(Stage::Strips) + self.get(Stage::Schur)
    }

    pub fn solve_total(&self) -> u64 {
        self.get(Stage::SolveLower) + self.get(Stage::SolveUpper)
    }

    /// Folds another run's counts into this one.
    pub fn merge(&mut self, other: &CmCounter) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

/// Parameters of the closed-form counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmParams {
    pub m: usize,
    pub n: usize,
    /// Channel delay length.
    pub alpha: usize,
    /// Channel Doppler length.
    pub beta: usize,
    /// Path count.
    pub paths: usize,
    pub scheme: SchemeKind,
}

impl CmParams {
    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.alpha == 0 || self.paths == 0 {
            return config_err(format!(
                "complexity parameters must be positive (M={}, N={}, alpha={}, P={})",
                self.m, self.n, self.alpha, self.paths
            ));
        }
        Ok(())
    }

    fn mn(&self) -> f64 {
        (self.m * self.n) as f64
    }

    /// `log2` of the demodulator FFT length: `N` for OTFS, `M` for OFDM.
    fn log2_fft(&self) -> f64 {
        match self.scheme {
            SchemeKind::Otfs => (self.n as f64).log2(),
            SchemeKind::Ofdm => (self.m as f64).log2(),
        }
    }
}

/// Rows of the per-operation count table of the proposed receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperationRow {
    /// Assembly of `HH^H + nsr I`.
    Assembly,
    /// Banded LU of the core block.
    CoreLu,
    /// The `E` and `V` strips.
    Strips,
    /// Schur complement and its LU.
    Schur,
    /// Both quasi-banded triangular solves.
    Solves,
    /// Application of `H^H`.
    Adjoint,
    /// Matched-filter demodulation.
    Demod,
}

impl OperationRow {
    pub const ALL: [OperationRow; 7] = [
        OperationRow::Assembly,
        OperationRow::CoreLu,
        OperationRow::Strips,
        OperationRow::Schur,
        OperationRow::Solves,
        OperationRow::Adjoint,
        OperationRow::Demod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperationRow::Assembly => "assemble",
            OperationRow::CoreLu => "factor_core",
            OperationRow::Strips => "strips",
            OperationRow::Schur => "schur",
            OperationRow::Solves => "solves",
            OperationRow::Adjoint => "adjoint",
            OperationRow::Demod => "demod",
        }
    }

    /// Counter stages measured against this row.
    pub fn stages(self) -> &'static [Stage] {
        match self {
            OperationRow::Assembly => &[Stage::Assemble],
            OperationRow::CoreLu => &[Stage::FactorCore],
            OperationRow::Strips => &[Stage::Strips],
            OperationRow::Schur => &[Stage::Schur],
            OperationRow::Solves => &[Stage::SolveLower, Stage::SolveUpper],
            OperationRow::Adjoint => &[Stage::Adjoint],
            OperationRow::Demod => &[Stage::Demod],
        }
    }
}

/// Closed-form CM count of one operation of the proposed receiver.
pub fn formula_table1(row: OperationRow, p: &CmParams) -> Result<f64> {
    p.validate()?;
    let mn = p.mn();
    let a = p.alpha as f64;
    let b = p.beta as f64;
    let pp = p.paths as f64;
    Ok(match row {
        OperationRow::Assembly => (pp * pp - pp) * (2.0 * b + 1.0) * mn + pp,
        OperationRow::CoreLu => (a * a + 2.0 * a) * mn,
        OperationRow::Strips => a * mn - (3.0 * a.powi(3) + a) / 2.0,
        OperationRow::Schur => a * a * mn - mn + 2.0 * a.powi(3) / 3.0,
        OperationRow::Solves => mn * (2.0 * a - 1.0) + 3.0 * a * a / 2.0 + a / 2.0,
        OperationRow::Adjoint => pp * (b + 1.0) * mn,
        OperationRow::Demod => mn / 2.0 * p.log2_fft(),
    })
}

/// CM count of evaluating the LMMSE estimate directly with dense matrices.
pub fn formula_direct(m: usize, n: usize, scheme: SchemeKind) -> Result<f64> {
    if m == 0 || n == 0 {
        return config_err("complexity parameters must be positive");
    }
    let mn = (m * n) as f64;
    let log2 = match scheme {
        SchemeKind::Otfs => (n as f64).log2(),
        SchemeKind::Ofdm => (m as f64).log2(),
    };
    Ok(mn / 2.0 * log2 + 8.0 / 6.0 * mn.powi(3) + 2.0 * mn * mn)
}

/// CM count of the proposed receiver, whole pipeline.
pub fn formula_proposed(p: &CmParams) -> Result<f64> {
    p.validate()?;
    let mn = p.mn();
    let a = p.alpha as f64;
    let b = p.beta as f64;
    let pp = p.paths as f64;
    Ok(mn / 2.0 * p.log2_fft()
        + mn * (2.0 * a * a + 2.0 * pp * pp * b + 9.0 * a - pp * b - 3.0)
        + 2.0 / 3.0 * a.powi(3)
        + 2.0 * a
        + pp)
}

/// One line of an audit: measured against closed-form count.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub stage: &'static str,
    pub measured: u64,
    pub analytic: f64,
    pub ratio: f64,
    /// Set when the measured count exceeds twice the closed form.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub params: CmParams,
    pub rows: Vec<AuditRow>,
}

/// Measured-versus-analytic comparison of a completed receiver run.
pub fn audit_run(counter: &CmCounter, params: &CmParams) -> Result<AuditReport> {
    let mut rows = Vec::with_capacity(OperationRow::ALL.len());
    for row in OperationRow::ALL {
        let measured: u64 = row.stages().iter().map(|&s| counter.get(s)).sum();
        let analytic = formula_table1(row, params)?;
        let ratio = measured as f64 / analytic;
        rows.push(AuditRow {
            stage: row.name(),
            measured,
            analytic,
            ratio,
            flagged: measured as f64 > 2.0 * analytic,
        });
    }
    Ok(AuditReport {
        params: *params,
        rows,
    })
}

impl AuditReport {
    pub fn row(&self, stage: &str) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.stage == stage)
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }

    /// Writes `stage,measured,analytic,ratio` CSV with a header row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["stage", "measured", "analytic", "ratio"])?;
        for r in &self.rows {
            out.write_record([
                r.stage.to_string(),
                r.measured.to_string(),
                format!("{:.1}", r.analytic),
                format!("{:.4}", r.ratio),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "CM audit: M={} N={} alpha={} beta={} P={} scheme={}",
            p.m, p.n, p.alpha, p.beta, p.paths, p.scheme
        )?;
        writeln!(
            f,
            "{:<12} {:>14} {:>16} {:>8}",
            "stage", "measured", "analytic", "ratio"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<12} {:>14} {:>16.1} {:>8.3}{}",
                r.stage,
                r.measured,
                r.analytic,
                r.ratio,
                if r.flagged { "  > 2x" } else { "" }
            )?;
        }
        Ok(())
    }
}
