//! Reconstruction-failure probability under independent node failures.
//!
//! `P_f(p) = Σ_{k=1..M} FC(k) p^k (1-p)^(M-k)` where `FC(k)` counts the
//! undecodable `k`-failure patterns. Replication schemes have a closed form
//! by inclusion-exclusion over the seven base products; every other scheme
//! takes `FC` from the exhaustive census.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::decode::{binomial, census_from_table, DecodabilityTable};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::scheme::{Scheme, SchemeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    ClosedForm,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReliabilityProfile {
    pub scheme: String,
    pub m: usize,
    /// `fc[k]` for `k = 0..=m`.
    pub fc: Vec<u64>,
    pub source: ProfileSource,
}

/// `FC(k)` for `c`-copy replication of a seven-product base algorithm.
pub fn fc_replication_closed_form(c: u32, k: u32) -> u64 {
    if c == 0 || k < c {
        return 0;
    }
    let (c, k) = (u64::from(c), u64::from(k));
    let total: i128 = (1..=k / c)
        .map(|n| {
            let term = i128::from(binomial(7, n)) * i128::from(binomial(7 * c - c * n, k - c * n));
            if n % 2 == 1 {
                term
            } else {
                -term
            }
        })
        .sum();
    u64::try_from(total).expect("inclusion-exclusion count is non-negative")
}

pub fn replication_profile(id: &str, copies: u32) -> ReliabilityProfile {
    let m = 7 * copies as usize;
    ReliabilityProfile {
        scheme: id.to_string(),
        m,
        fc: (0..=m as u32).map(|k| fc_replication_closed_form(copies, k)).collect(),
        source: ProfileSource::ClosedForm,
    }
}

/// Closed form for replication, exhaustive census otherwise.
pub fn profile_for(scheme: &Scheme) -> Result<ReliabilityProfile> {
    if let SchemeKind::Replication { copies, .. } = scheme.kind {
        return Ok(replication_profile(&scheme.id, u32::from(copies)));
    }
    let table = DecodabilityTable::new(scheme)?;
    Ok(exhaustive_profile(&scheme.id, &table))
}

pub fn exhaustive_profile(id: &str, table: &DecodabilityTable) -> ReliabilityProfile {
    let census = census_from_table(id, table);
    ReliabilityProfile {
        scheme: id.to_string(),
        m: census.m,
        fc: census.undecodable,
        source: ProfileSource::Exhaustive,
    }
}

pub fn p_fail_theoretical(profile: &ReliabilityProfile, p_e: f64) -> f64 {
    let m = profile.m as i32;
    (1..=profile.m).map(|k| profile.fc[k] as f64 * p_e.powi(k as i32) * (1.0 - p_e).powi(m - k as i32)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error of the estimate itself.
    pub stderr: f64,
    pub failures: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Standard error of a Bernoulli(`p`) mean over `trials` samples.
pub fn binomial_stderr(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Monte Carlo estimate with a table built on the fly.
pub fn p_fail_monte_carlo(scheme: &Scheme, p_e: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    let table = DecodabilityTable::new(scheme)?;
    p_fail_monte_carlo_with(&table, &scheme.id, p_e, trials, seed)
}

pub fn p_fail_monte_carlo_with(
    table: &DecodabilityTable,
    scheme_id: &str,
    p_e: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::InvalidArgument(format!("p_e = {p_e} outside [0, 1]")));
    }
    let key = StreamKey::new(seed, scheme_id, p_e);
    let m = table.m();
    const CHUNK: u64 = 4096;
    let failures: u64 = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(trials))
                .filter(|&t| !table.is_decodable(key.sample_pattern(t, m, p_e)))
                .count() as u64
        })
        .sum();
    let estimate = failures as f64 / trials as f64;
    Ok(McEstimate { estimate, stderr: binomial_stderr(estimate, trials), failures, trials, seed })
}

/// `points` log-spaced values in `[min, max]`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max < 1.0 && min <= max) || points == 0 {
        return Err(Error::InvalidArgument(format!("bad grid {min}:{max}:{points}")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.log10(), max.log10());
    let mut grid: Vec<f64> = (0..points).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64)).collect();
    grid[0] = min;
    grid[points - 1] = max;
    Ok(grid)
}

/// Twenty-one log-spaced points in `[1e-3, 0.5]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 0.5, 21).expect("static grid is valid")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub p_e: f64,
    pub p_f_theory: f64,
    pub p_f_mc: f64,
    pub mc_stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureCurve {
    pub scheme: String,
    pub m: usize,
    pub rows: Vec<CurveRow>,
}

impl FailureCurve {
    pub fn theory_is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].p_f_theory <= w[1].p_f_theory)
    }
}

/// Theory and Monte Carlo curves for each scheme over the grid.
pub fn curve(schemes: &[Scheme], grid: &[f64], trials: u64, seed: u64) -> Result<Vec<FailureCurve>> {
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidArgument(format!("grid value {p} outside (0, 1)")));
    }
    schemes
        .iter()
        .map(|s| {
            let table = DecodabilityTable::new(s)?;
            let profile = match s.kind {
                SchemeKind::Replication { .. } => profile_for(s)?,
                _ => exhaustive_profile(&s.id, &table),
            };
            let rows = grid
                .iter()
                .map(|&p| {
                    let mc = p_fail_monte_carlo_with(&table, &s.id, p, trials, seed)?;
                    Ok(CurveRow {
                        p_e: p,
                        p_f_theory: p_fail_theoretical(&profile, p),
                        p_f_mc: mc.estimate,
                        mc_stderr: mc.stderr,
                        trials,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FailureCurve { scheme: s.id.clone(), m: s.m(), rows })
        })
        .collect()
}

/// CSV: `scheme,M,p_e,p_f_theory,p_f_mc,stderr,trials,seed`.
pub fn write_curves_csv<W: Write>(w: W, curves: &[FailureCurve]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "M", "p_e", "p_f_theory", "p_f_mc", "stderr", "trials", "seed"])?;
    for c in curves {
        for r in &c.rows {
            out.write_record([
                c.scheme.clone(),
                c.m.to_string(),
                format!("{:e}", r.p_e),
                format!("{:e}", r.p_f_theory),
                format!("{:e}", r.p_f_mc),
                format!("{:e}", r.mc_stderr),
                r.trials.to_string(),
                r.seed.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// CSV: `scheme,k,fc,binom_M_k`.
pub fn write_fc_csv<W: Write>(w: W, profiles: &[ReliabilityProfile]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "k", "fc", "binom_M_k"])?;
    for p in profiles {
        for (k, fc) in p.fc.iter().enumerate() {
            out.write_record([
                p.scheme.clone(),
                k.to_string(),
                fc.to_string(),
                binomial(p.m as u64, k as u64).to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
