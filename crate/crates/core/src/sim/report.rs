use std::io::Write;

use super::config::ComplexityConfig;
use crate::channel::{channel_lengths, max_doppler_hz, PowerDelayProfile};
use crate::complexity::{formula_direct, formula_proposed, CmParams};
use crate::error::Result;
use crate::grid::OtfsGrid;
use crate::modem::SchemeKind;

/// One `(N, M, scheme)` point of the complexity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub profile: String,
    pub n: usize,
    pub m: usize,
    pub alpha: usize,
    pub beta: usize,
    pub paths: usize,
    pub scheme: SchemeKind,
    pub direct_cm: f64,
    pub proposed_cm: f64,
    pub ratio: f64,
}

/// Closed-form CM counts of the direct and proposed receivers for
/// `M = 2, 4, ..., m_max` at every configured `N` and scheme. The channel
/// lengths follow the grid: `alpha = ceil(tau_max M delta_f)`,
/// `beta = ceil(nu_max N T)`.
pub fn run_complexity_report(cfg: &ComplexityConfig) -> Result<Vec<ComplexityRow>> {
    cfg.validate()?;
    let profile = PowerDelayProfile::resolve(&cfg.profile)?;
    let nu_max = max_doppler_hz(cfg.speed_kmh / 3.6, cfg.fc_ghz * 1e9);
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &scheme in &cfg.schemes {
            let mut m = 2;
            while m <= cfg.m_max {
                let grid = OtfsGrid::new(m, n, cfg.delta_f)?;
                let (alpha, beta) = channel_lengths(&grid, profile.max_delay(), nu_max);
                let params = CmParams {
                    m,
                    n,
                    alpha,
                    beta,
                    paths: profile.len(),
                    scheme,
                };
                let direct_cm = formula_direct(m, n, scheme)?;
                let proposed_cm = formula_proposed(&params)?;
                rows.push(ComplexityRow {
                    profile: profile.name.clone(),
                    n,
                    m,
                    alpha,
                    beta,
                    paths: profile.len(),
                    scheme,
                    direct_cm,
                    proposed_cm,
                    ratio: direct_cm / proposed_cm,
                });
                m *= 2;
            }
        }
    }
    Ok(rows)
}

/// CSV with header `profile,n,m,alpha,beta,p,scheme,direct_cm,proposed_cm,ratio`.
pub fn write_complexity_csv<W: Write>(rows: &[ComplexityRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "profile",
        "n",
        "m",
        "alpha",
        "beta",
        "p",
        "scheme",
        "direct_cm",
        "proposed_cm",
        "ratio",
    ])?;
    for r in rows {
        out.write_record([
            r.profile.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.paths.to_string(),
            r.scheme.to_string(),
            format!("{:.6e}", r.direct_cm),
            format!("{:.6e}", r.proposed_cm),
            format!("{:.6e}", r.ratio),
        ])?;
    }
    out.flush()?;
    Ok(())
}
