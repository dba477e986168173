//! Monte-Carlo BER sweeps, complexity reports and the oracle self-test
//! behind the `otfs` command-line tool.

mod ber;
mod config;
mod report;
mod selftest;

pub use ber::{
    frame_decisions, run_ber_sweep, write_ber_csv, BerPoint, FrameDecisions, SNR_CONVENTION,
};
pub use config::{
    ComplexityConfig, ConfigFile, ReceiverKind, SimConfig, FULL_SCALE_M, FULL_SCALE_N,
};
pub use report::{run_complexity_report, write_complexity_csv, ComplexityRow};
pub use selftest::{
    random_channel, run_selftest, SelftestReport, SELFTEST_GRIDS, SELFTEST_NSR, SELFTEST_TOLERANCE,
};
