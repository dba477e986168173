use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::PowerDelayProfile;
use crate::error::{config_err, Error, Result};
use crate::grid::OtfsGrid;
use crate::modem::SchemeKind;
use crate::oracle::DENSE_LMMSE_MAX_MN;
use crate::qam::QamConstellation;

pub const FULL_SCALE_M: usize = 512;
pub const FULL_SCALE_N: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    /// Quasi-banded LU receiver.
    Fast,
    /// Literal dense LMMSE; small grids only.
    #[serde(alias = "dense-oracle")]
    Dense,
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReceiverKind::Fast => "fast",
            ReceiverKind::Dense => "dense",
        })
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(ReceiverKind::Fast),
            "dense" | "dense-oracle" => Ok(ReceiverKind::Dense),
            other => config_err(format!("receiver: unknown receiver '{other}' (fast|dense)")),
        }
    }
}

/// BER sweep parameters. Defaults are the desk-scale EVA setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub m: usize,
    pub n: usize,
    pub delta_f: f64,
    pub scheme: SchemeKind,
    pub receiver: ReceiverKind,
    pub qam: usize,
    /// Built-in profile name or path to a profile file.
    pub profile: String,
    pub speed_kmh: f64,
    pub fc_ghz: f64,
    pub snr_db: Vec<f64>,
    /// Frames per SNR point.
    pub frames: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    /// Transmit with a cyclic prefix over a linear channel instead of
    /// applying the cyclic channel directly.
    pub cyclic_prefix: bool,
    /// Use the 512 x 128 grid regardless of `m`, `n`.
    pub full_scale: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n: 32,
            delta_f: 15e3,
            scheme: SchemeKind::Otfs,
            receiver: ReceiverKind::Fast,
            qam: 4,
            profile: "eva".into(),
            speed_kmh: 500.0,
            fc_ghz: 4.0,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            frames: 100,
            seed: 1,
            out: None,
            workers: 0,
            cyclic_prefix: true,
            full_scale: false,
        }
    }
}

impl SimConfig {
    /// Grid after applying `full_scale`.
    pub fn grid(&self) -> Result<OtfsGrid> {
        let (m, n) = if self.full_scale {
            (FULL_SCALE_M, FULL_SCALE_N)
        } else {
            (self.m, self.n)
        };
        OtfsGrid::new(m, n, self.delta_f).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_kmh / 3.6
    }

    pub fn carrier_hz(&self) -> f64 {
        self.fc_ghz * 1e9
    }

    /// Checks every field, naming the offending one.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.frames == 0 {
            return config_err("frames: must be at least 1");
        }
        if self.snr_db.is_empty() {
            return config_err("snr_db: list must not be empty");
        }
        if let Some(bad) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return config_err(format!("snr_db: {bad} is not finite"));
        }
        QamConstellation::new(self.qam).map_err(|e| Error::Config(format!("qam: {e}")))?;
        if !(self.speed_kmh.is_finite() && self.speed_kmh >= 0.0) {
            return config_err(format!("speed_kmh: {} must be >= 0", self.speed_kmh));
        }
        if !(self.fc_ghz.is_finite() && self.fc_ghz > 0.0) {
            return config_err(format!("fc_ghz: {} must be positive", self.fc_ghz));
        }
        PowerDelayProfile::resolve(&self.profile)
            .map_err(|e| Error::Config(format!("profile: {e}")))?;
        if self.receiver == ReceiverKind::Dense && grid.mn() > DENSE_LMMSE_MAX_MN {
            return config_err(format!(
                "receiver: dense receiver limited to MN <= {DENSE_LMMSE_MAX_MN}, grid has {}",
                grid.mn()
            ));
        }
        Ok(())
    }
}

/// Complexity sweep parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityConfig {
    pub profile: String,
    /// Block sizes `N`, one sweep each.
    pub n: Vec<usize>,
    /// Sweep `M = 2, 4, ..., m_max`.
    pub m_max: usize,
    pub delta_f: f64,
    pub speed_kmh: f64,
    pub fc_ghz: f64,
    pub schemes: Vec<SchemeKind>,
    pub out: Option<PathBuf>,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            profile: "eva".into(),
            n: vec![16, 128],
            m_max: 4096,
            delta_f: 15e3,
            speed_kmh: 500.0,
            fc_ghz: 4.0,
            schemes: vec![SchemeKind::Otfs, SchemeKind::Ofdm],
            out: None,
        }
    }
}

impl ComplexityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_max < 2 || !self.m_max.is_power_of_two() {
            return config_err(format!("m_max: {} must be a power of two >= 2", self.m_max));
        }
        if self.n.is_empty() {
            return config_err("n: list must not be empty");
        }
        if let Some(bad) = self.n.iter().find(|n| !n.is_power_of_two()) {
            return config_err(format!("n: {bad} is not a power of two"));
        }
        if self.schemes.is_empty() {
            return config_err("schemes: list must not be empty");
        }
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return config_err(format!("delta_f: {} must be positive", self.delta_f));
        }
        if !(self.speed_kmh.is_finite() && self.speed_kmh >= 0.0) {
            return config_err(format!("speed_kmh: {} must be >= 0", self.speed_kmh));
        }
        if !(self.fc_ghz.is_finite() && self.fc_ghz > 0.0) {
            return config_err(format!("fc_ghz: {} must be positive", self.fc_ghz));
        }
        PowerDelayProfile::resolve(&self.profile)
            .map_err(|e| Error::Config(format!("profile: {e}")))?;
        Ok(())
    }
}

/// Layout of a `--config` file: optional `[ber]` and `[complexity]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub ber: SimConfig,
    pub complexity: ComplexityConfig,
}

impl ConfigFile {
    pub fn parse(source_name: &str, text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&path.display().to_string(), &text)
    }
}
