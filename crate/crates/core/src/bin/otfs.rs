//! `otfs` command-line front end: BER sweeps, complexity tables and the
//! oracle self-test.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otfs_core::modem::SchemeKind;
use otfs_core::sim::{
    run_ber_sweep, run_complexity_report, run_selftest, write_ber_csv, write_complexity_csv,
    ConfigFile, ReceiverKind, SELFTEST_TOLERANCE, SNR_CONVENTION,
};
use otfs_core::Result;

#[derive(Parser)]
#[command(name = "otfs", version, about = "OTFS/OFDM LMMSE receiver simulator")]
struct Cli {
    /// TOML file with optional [ber] and [complexity] tables; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BER sweep.
    Ber(BerArgs),
    /// Closed-form CM counts of direct and proposed receivers over M.
    Complexity(ComplexityArgs),
    /// Fast receiver against the dense LMMSE on random small channels.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct BerArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta_f: Option<f64>,
    #[arg(long)]
    scheme: Option<SchemeKind>,
    #[arg(long)]
    receiver: Option<ReceiverKind>,
    #[arg(long)]
    qam: Option<usize>,
    /// Built-in profile (eva, evb) or a profile file.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    speed_kmh: Option<f64>,
    #[arg(long)]
    fc_ghz: Option<f64>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Apply the cyclic channel directly instead of CP + linear channel.
    #[arg(long)]
    no_cp: bool,
    /// 512 x 128 grid (fast receiver only).
    #[arg(long)]
    full_scale: bool,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    profile: Option<String>,
    /// Comma-separated block sizes N.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<SchemeKind>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn ber(file: ConfigFile, a: BerArgs) -> Result<()> {
    let mut cfg = file.ber;
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { cfg.$f = v; })* };
    }
    set!(
        m, n, delta_f, scheme, receiver, qam, profile, speed_kmh, fc_ghz, snr_db, frames, seed,
        workers
    );
    if a.out.is_some() {
        cfg.out = a.out;
    }
    if a.no_cp {
        cfg.cyclic_prefix = false;
    }
    if a.full_scale {
        cfg.full_scale = true;
    }
    if cfg.full_scale && cfg.receiver == ReceiverKind::Dense {
        return Err(otfs_core::Error::Config(
            "full_scale: only the fast receiver runs at full scale".into(),
        ));
    }
    cfg.validate()?;
    let grid = cfg.grid()?;
    log::info!(
        "ber: M={} N={} {} {} receiver, {}-QAM, {} frames/point; SNR axis: {SNR_CONVENTION}",
        grid.m(),
        grid.n(),
        cfg.scheme,
        cfg.receiver,
        cfg.qam,
        cfg.frames
    );
    let points = run_ber_sweep(&cfg)?;
    for p in &points {
        if p.bits_total != p.frames * (grid.mn() * cfg.qam.trailing_zeros() as usize) as u64 {
            return Err(otfs_core::Error::Config(format!(
                "bit count mismatch at {} dB",
                p.snr_db
            )));
        }
    }
    write_ber_csv(&points, &cfg, output(cfg.out.as_deref())?)
}

fn complexity(file: ConfigFile, a: ComplexityArgs) -> Result<()> {
    let mut cfg = file.complexity;
    if let Some(v) = a.profile {
        cfg.profile = v;
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.m_max {
        cfg.m_max = v;
    }
    if let Some(v) = a.scheme {
        cfg.schemes = v;
    }
    if a.out.is_some() {
        cfg.out = a.out;
    }
    let rows = run_complexity_report(&cfg)?;
    write_complexity_csv(&rows, output(cfg.out.as_deref())?)
}

fn selftest(a: SelftestArgs) -> Result<bool> {
    let r = run_selftest(a.instances, a.seed)?;
    println!(
        "selftest: {} instances, max relative error {:.3e} (tolerance {SELFTEST_TOLERANCE:e}), {} failures",
        r.instances, r.max_rel_err, r.failures
    );
    Ok(r.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<bool> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        match cli.command {
            Command::Ber(a) => ber(file, a).map(|_| true),
            Command::Complexity(a) => complexity(file, a).map(|_| true),
            Command::Selftest(a) => selftest(a),
        }
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
