//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use num_complex::Complex64;
use otfs_core::channel::{
    channel_lengths, draw_channel, max_doppler_hz, DdChannel, DdPath, PowerDelayProfile,
};
use otfs_core::complexity::{audit_run, CmCounter, CmParams, NoTally, Stage};
use otfs_core::equalizer::LmmseFastReceiver;
use otfs_core::grid::OtfsGrid;
use otfs_core::modem::SchemeKind;
use otfs_core::oracle::dense_channel_matrix;
use otfs_core::qb::{assemble_psi, factor};
use otfs_core::sim::{
    frame_decisions, random_channel, run_ber_sweep, run_complexity_report, run_selftest,
    write_ber_csv, BerPoint, ComplexityConfig, ReceiverKind, SimConfig, SELFTEST_GRIDS,
    SELFTEST_NSR,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let r = run_selftest(200, 20_241_015).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    check(
        r.passed() && secs < 60.0,
        format!(
            "{} instances, max rel err {:.2e}, {} failures, {secs:.1}s",
            r.instances, r.max_rel_err, r.failures
        ),
    )
}

fn lu_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut unit_diag = true;
    let mut count = 0;
    for &(m, n) in &SELFTEST_GRIDS {
        let grid = OtfsGrid::new(m, n, 1.0).unwrap();
        for paths in 1..=5 {
            for &nsr in &SELFTEST_NSR {
                let ch = random_channel(grid, paths, &mut rng).map_err(|e| e.to_string())?;
                let psi = assemble_psi(&ch, nsr, &mut NoTally).map_err(|e| e.to_string())?;
                let lu = factor(&psi, &mut NoTally).map_err(|e| e.to_string())?;
                let (l, u) = lu.to_dense();
                let dense = psi.to_dense();
                worst = worst.max(l.matmul(&u).sub(&dense).max_abs() / dense.max_abs());
                unit_diag &= (0..l.rows()).all(|i| l[(i, i)] == Complex64::new(1.0, 0.0));
                count += 1;
            }
        }
    }
    check(
        worst <= 1e-9 && unit_diag,
        format!("{count} factorizations, max rel residual {worst:.2e}, unit diag(L): {unit_diag}"),
    )
}

fn quasi_banded_structure() -> Outcome {
    let eva = PowerDelayProfile::builtin("eva").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nonzero_outside = 0usize;
    let mut checked = 0usize;
    let mut alphas = Vec::new();
    for &(m, n) in &[(32, 16), (64, 16)] {
        let grid = OtfsGrid::new(m, n, 15e3).unwrap();
        for _ in 0..3 {
            let ch =
                draw_channel(&eva, 500.0 / 3.6, 4e9, &grid, &mut rng).map_err(|e| e.to_string())?;
            let alpha = ch.alpha();
            alphas.push(alpha);
            let h = dense_channel_matrix(&ch).map_err(|e| e.to_string())?;
            let mut psi = h.matmul(&h.adjoint());
            psi.add_scaled_identity(0.01);
            let mn = grid.mn();
            for i in 0..mn {
                for j in 0..mn {
                    let d = (j + mn - i) % mn;
                    if d.min(mn - d) > alpha - 1 {
                        checked += 1;
                        if psi[(i, j)] != Complex64::new(0.0, 0.0) {
                            nonzero_outside += 1;
                        }
                    }
                }
            }
        }
    }
    check(
        nonzero_outside == 0,
        format!("alpha {alphas:?}: {checked} entries beyond cyclic offset alpha-1, {nonzero_outside} nonzero"),
    )
}

fn channel_geometry() -> Outcome {
    let grid = OtfsGrid::new(512, 128, 15e3).unwrap();
    let eva = PowerDelayProfile::builtin("eva").unwrap();
    let (alpha, beta) = channel_lengths(&grid, eva.max_delay(), max_doppler_hz(500.0 / 3.6, 4e9));
    check(
        alpha == 20 && beta == 16,
        format!("alpha = {alpha}, beta = {beta}"),
    )
}

fn complexity_ratios() -> Outcome {
    let max_ratio = |profile: &str| -> Result<f64, String> {
        let cfg = ComplexityConfig {
            profile: profile.into(),
            n: vec![128],
            schemes: vec![SchemeKind::Otfs],
            ..ComplexityConfig::default()
        };
        let rows = run_complexity_report(&cfg).map_err(|e| e.to_string())?;
        Ok(rows.iter().map(|r| r.ratio).fold(0.0, f64::max))
    };
    let eva = max_ratio("eva")?;
    let evb = max_ratio("evb")?;
    check(
        (1e6..=1e8).contains(&eva) && (1e5..=1e6).contains(&evb),
        format!("EVA N=128 max ratio {eva:.3e} (want [1e6,1e8]), EVB {evb:.3e} (want [1e5,1e6])"),
    )
}

fn instrumented_counts() -> Outcome {
    let grid = OtfsGrid::new(32, 32, 15e3).unwrap();
    let c = |re, im| Complex64::new(re, im);
    let ch = DdChannel::new(
        grid,
        vec![
            DdPath::new(c(0.7, 0.1), 0, 0),
            DdPath::new(c(-0.3, 0.4), 1, 2),
            DdPath::new(c(0.2, -0.35), 3, -1),
        ],
    )
    .map_err(|e| e.to_string())?;
    let params = CmParams {
        m: 32,
        n: 32,
        alpha: ch.alpha(),
        beta: ch.beta(),
        paths: 3,
        scheme: SchemeKind::Otfs,
    };
    let mut counter = CmCounter::new();
    let rx = LmmseFastReceiver::new_counted(ch, 0.1, SchemeKind::Otfs, &mut counter)
        .map_err(|e| e.to_string())?;
    let r: Vec<Complex64> = (0..1024)
        .map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos()))
        .collect();
    rx.equalize_counted(&r, &mut counter)
        .map_err(|e| e.to_string())?;
    let report = audit_run(&counter, &params).map_err(|e| e.to_string())?;
    let demod_exact = counter.get(Stage::Demod) == 1024 / 2 * 5;
    let stages: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{}={}/{:.0}({:.2}x)",
                r.stage, r.measured, r.analytic, r.ratio
            )
        })
        .collect();
    let over: Vec<&str> = report
        .rows
        .iter()
        .filter(|r| r.flagged)
        .map(|r| r.stage)
        .collect();
    check(
        !report.any_flagged() && demod_exact,
        format!(
            "alpha={} P=3 MN=1024: {}; demod exact: {demod_exact}; over 2x: {over:?}",
            params.alpha,
            stages.join(" ")
        ),
    )
}

fn scaling_exponent() -> Outcome {
    let c = |re, im| Complex64::new(re, im);
    let mut pts = Vec::new();
    for m in [16, 64, 256] {
        let grid = OtfsGrid::new(m, 16, 15e3).unwrap();
        let ch = DdChannel::new(
            grid,
            vec![
                DdPath::new(c(0.7, 0.1), 0, 0),
                DdPath::new(c(-0.3, 0.4), 1, 2),
                DdPath::new(c(0.2, -0.35), 3, -1),
            ],
        )
        .map_err(|e| e.to_string())?;
        let mut counter = CmCounter::new();
        let rx = LmmseFastReceiver::new_counted(ch, 0.1, SchemeKind::Otfs, &mut counter)
            .map_err(|e| e.to_string())?;
        let r = vec![c(1.0, 0.0); grid.mn()];
        rx.equalize_counted(&r, &mut counter)
            .map_err(|e| e.to_string())?;
        let total = counter.factor_total() + counter.solve_total();
        pts.push(((grid.mn() as f64).ln(), (total as f64).ln()));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = num / den;
    check(
        (0.9..=1.2).contains(&slope),
        format!("factor+solve CMs ~ MN^{slope:.3} over MN in {{256, 1024, 4096}}"),
    )
}

fn se_diff(a: &BerPoint, b: &BerPoint) -> f64 {
    (a.std_error().powi(2) + b.std_error().powi(2)).sqrt()
}

fn ber_properties() -> Outcome {
    let t = Instant::now();
    // (a) decisions of fast and dense receivers, frame by frame; the dense
    // receiver is limited to MN <= 1024.
    let small = SimConfig {
        m: 32,
        n: 16,
        snr_db: vec![0.0, 10.0, 20.0],
        frames: 4,
        seed: 11,
        ..SimConfig::default()
    };
    let mut identical = true;
    for scheme in [SchemeKind::Otfs, SchemeKind::Ofdm] {
        for f in 0..small.frames as u64 {
            let fast = SimConfig {
                scheme,
                ..small.clone()
            };
            let dense = SimConfig {
                receiver: ReceiverKind::Dense,
                ..fast.clone()
            };
            let a = frame_decisions(&fast, f).map_err(|e| e.to_string())?;
            let b = frame_decisions(&dense, f).map_err(|e| e.to_string())?;
            identical &= a == b;
        }
    }

    // (b), (c) at desk scale.
    let desk = SimConfig {
        snr_db: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
        frames: 200,
        seed: 5,
        ..SimConfig::default()
    };
    let otfs = run_ber_sweep(&desk).map_err(|e| e.to_string())?;
    let ofdm = run_ber_sweep(&SimConfig {
        scheme: SchemeKind::Ofdm,
        ..desk.clone()
    })
    .map_err(|e| e.to_string())?;
    let bits = otfs[0].bits_total;
    let k = otfs.len();
    let otfs_wins =
        (k - 2..k).all(|i| ofdm[i].ber - otfs[i].ber > 3.0 * se_diff(&otfs[i], &ofdm[i]));
    let monotone = |curve: &[BerPoint]| {
        let inversions: Vec<usize> = (1..curve.len())
            .filter(|&i| curve[i].ber > curve[i - 1].ber)
            .collect();
        inversions.len() <= 1
            && inversions.iter().all(|&i| {
                curve[i].ber - curve[i - 1].ber <= 2.0 * se_diff(&curve[i], &curve[i - 1])
            })
    };
    let mono = monotone(&otfs) && monotone(&ofdm);
    let fmt = |c: &[BerPoint]| {
        c.iter()
            .map(|p| format!("{:.2e}", p.ber))
            .collect::<Vec<_>>()
            .join(",")
    };
    let secs = t.elapsed().as_secs_f64();
    check(
        identical && otfs_wins && mono && bits >= 100_000 && secs < 600.0,
        format!(
            "(a) identical decisions {identical}; (b) OTFS [{}] vs OFDM [{}] at {:?} dB: {otfs_wins}; \
             (c) monotone {mono}; {bits} bits/point; {secs:.1}s",
            fmt(&otfs),
            fmt(&ofdm),
            desk.snr_db
        ),
    )
}

fn determinism() -> Outcome {
    let csv = |workers: usize| -> Result<Vec<u8>, String> {
        let cfg = SimConfig {
            frames: 24,
            snr_db: vec![0.0, 10.0, 20.0],
            workers,
            ..SimConfig::default()
        };
        let pts = run_ber_sweep(&cfg).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_ber_csv(&pts, &cfg, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let one = csv(1)?;
    let again = csv(1)?;
    let four = csv(4)?;
    let many = csv(7)?;
    check(
        one == again && one == four && one == many,
        format!(
            "CSV of {} bytes identical across runs and 1/4/7 workers: {}",
            one.len(),
            one == four && one == many
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("LU reconstruction", lu_reconstruction),
        ("quasi-banded structure", quasi_banded_structure),
        ("channel geometry", channel_geometry),
        ("complexity ratios", complexity_ratios),
        ("instrumented counts", instrumented_counts),
        ("scaling exponent", scaling_exponent),
        ("BER properties", ber_properties),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS - {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL - {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
