//! Parameter sweeps over the trial pipeline.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DetectorKind, ExperimentConfig};
use super::overlay::{average_ber, FadingDraws};
use super::trial::{trial_rng, SyncTrial, TrialRunner};
use crate::analysis::db_to_linear;
use crate::combining::CombinerScheme;
use crate::error::{Error, Result};

/// Stream key of the fading draws behind the analytic overlay.
const OVERLAY_STREAM: u64 = 0x0A4A_17C0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ber,
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x_value: f64,
    /// Empirical BER or normalised MSE.
    pub value: f64,
    pub analytic: Option<f64>,
    pub trials: usize,
    /// Half-width of the 95% confidence interval of `value`.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub x_unit: String,
    pub metric: Metric,
    pub detector: String,
    pub combiner: String,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn new(cfg: &ExperimentConfig, x_unit: &str, metric: Metric) -> Self {
        Self {
            x_unit: x_unit.into(),
            metric,
            detector: cfg.detector.to_string(),
            combiner: cfg.combiner.to_string(),
            k: cfg.bd.k,
            m: cfg.antennas,
            seed: cfg.seed,
            rows: Vec::new(),
        }
    }
}

/// `1.96 sqrt(p (1 - p) / n)`
pub fn ber_ci_halfwidth(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Bit errors over `trials` trials of grid point `point`.
pub fn count_errors(runner: &TrialRunner, seed: u64, point: u64, trials: usize) -> Result<u64> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let r = runner.run(&mut trial_rng(seed, point, t))?;
            Ok(u64::from(r.sent != r.detected))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn ber_row(runner: &TrialRunner, cfg: &ExperimentConfig, point: u64, x: f64) -> Result<SweepRow> {
    let errors = count_errors(runner, cfg.seed, point, cfg.trials)?;
    let p = errors as f64 / cfg.trials as f64;
    Ok(SweepRow {
        x_value: x,
        value: p,
        analytic: None,
        trials: cfg.trials,
        ci_halfwidth: ber_ci_halfwidth(p, cfg.trials),
    })
}

/// Overlay draws and repeating length for the configured geometry.
fn overlay(cfg: &ExperimentConfig) -> Result<Option<(FadingDraws, usize)>> {
    if cfg.detector == DetectorKind::Benchmark {
        return Ok(None);
    }
    let profile = cfg.profile_at(cfg.distance)?;
    let geo = crate::channel::derive_geometry(
        &cfg.ofdm,
        profile.f,
        profile.h,
        crate::channel::PathProfile::new(profile.dg, 1),
    )?;
    let draws = FadingDraws::sample(
        cfg,
        cfg.analytic_draws,
        cfg.antennas,
        cfg.seed ^ OVERLAY_STREAM,
    )?;
    Ok(Some((draws, geo.j * cfg.bd.k)))
}

/// Fading-averaged closed-form BER at each SNR of `snr_db`.
pub fn analytic_curve(cfg: &ExperimentConfig, snr_db: &[f64]) -> Result<Vec<f64>> {
    let mut c = cfg.clone();
    c.detector = DetectorKind::Proposed;
    let (draws, j) = overlay(&c)?.expect("proposed detector has an overlay");
    snr_db
        .iter()
        .map(|&db| average_ber(&draws, db_to_linear(db), j, cfg.combiner, cfg.grid_step))
        .collect()
}

/// BER against mean detection SNR over `cfg.snr_grid`.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut out = SweepResult::new(cfg, "dB", Metric::Ber);
    let ov = overlay(cfg)?;
    for (i, &snr) in cfg.snr_grid.iter().enumerate() {
        let runner = TrialRunner::for_snr(cfg, snr)?;
        let mut row = ber_row(&runner, cfg, i as u64, snr)?;
        if let Some((draws, j)) = &ov {
            row.analytic = Some(average_ber(
                draws,
                db_to_linear(snr),
                *j,
                cfg.combiner,
                cfg.grid_step,
            )?);
        }
        out.rows.push(row);
    }
    Ok(out)
}

/// BER against BD to receiver distance with the noise power held fixed.
pub fn run_distance_sweep(cfg: &ExperimentConfig, distances: &[f64]) -> Result<SweepResult> {
    cfg.validate()?;
    if distances.is_empty() {
        return Err(Error::Config("no distances".into()));
    }
    let mut out = SweepResult::new(cfg, "m", Metric::Ber);
    let ov = overlay(cfg)?;
    for (i, &d) in distances.iter().enumerate() {
        let runner = TrialRunner::for_distance(cfg, d)?;
        let mut row = ber_row(&runner, cfg, i as u64, d)?;
        if let Some((draws, _)) = &ov {
            let geo = crate::channel::derive_geometry(
                &cfg.ofdm,
                runner.profile().f,
                runner.profile().h,
                crate::channel::PathProfile::new(runner.profile().dg, 1),
            )?;
            row.analytic = Some(average_ber(
                draws,
                runner.mean_gamma(),
                geo.j * cfg.bd.k,
                cfg.combiner,
                cfg.grid_step,
            )?);
        }
        out.rows.push(row);
    }
    Ok(out)
}

/// Synchronisation parameter whose estimate an MSE sweep scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MseParam {
    Dh,
    D,
    L,
}

impl MseParam {
    fn pick(self, s: &SyncTrial) -> (usize, usize) {
        match self {
            Self::Dh => (s.dh, s.dh_hat),
            Self::D => (s.d, s.d_hat),
            Self::L => (s.l, s.l_hat),
        }
    }
}

impl fmt::Display for MseParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dh => "dh",
            Self::D => "d",
            Self::L => "l",
        })
    }
}

impl FromStr for MseParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dh" => Ok(Self::Dh),
            "d" => Ok(Self::D),
            "l" => Ok(Self::L),
            _ => Err(Error::Parse(format!("unknown parameter '{s}'"))),
        }
    }
}

/// Sums of `e^2` and `e^4` over the trials of one point, `e` being the
/// integer estimation error, and the true parameter value.
pub fn sync_error_moments(
    runner: &TrialRunner,
    param: MseParam,
    seed: u64,
    point: u64,
    trials: usize,
) -> Result<(u64, u64, usize)> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = runner.run_sync(&mut trial_rng(seed, point, t))?;
            let (x, xh) = param.pick(&s);
            let e = x.abs_diff(xh) as u64;
            Ok((e * e, e * e * e * e, x))
        })
        .try_reduce(
            || (0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2.max(b.2))),
        )
}

/// Normalised MSE `E[(x_hat - x)^2] / x^2` of one sync parameter against
/// mean detection SNR.
pub fn run_mse_sweep(cfg: &ExperimentConfig, param: MseParam) -> Result<SweepResult> {
    cfg.validate()?;
    let mut out = SweepResult::new(cfg, "dB", Metric::Mse);
    for (i, &snr) in cfg.snr_grid.iter().enumerate() {
        let runner = TrialRunner::for_snr(cfg, snr)?;
        let (s2, s4, x) = sync_error_moments(&runner, param, cfg.seed, i as u64, cfg.trials)?;
        let n = cfg.trials as f64;
        let x2 = ((x * x) as f64).max(1.0);
        let mean = s2 as f64 / n;
        let var = (s4 as f64 / n - mean * mean).max(0.0);
        out.rows.push(SweepRow {
            x_value: snr,
            value: mean / x2,
            analytic: None,
            trials: cfg.trials,
            ci_halfwidth: 1.96 * (var / n).sqrt() / x2,
        });
    }
    Ok(out)
}

pub const COMBINERS: [CombinerScheme; 4] = [
    CombinerScheme::Optimal,
    CombinerScheme::Mrc,
    CombinerScheme::Egc,
    CombinerScheme::Sc,
];

/// One BER sweep per combining scheme, all on the same random streams.
pub fn run_combiner_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    COMBINERS
        .iter()
        .map(|&scheme| {
            let mut c = cfg.clone();
            c.combiner = scheme;
            run_ber_sweep(&c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_formula() {
        assert_eq!(ber_ci_halfwidth(0.0, 10), 0.0);
        assert!((ber_ci_halfwidth(0.5, 100) - 0.098).abs() < 1e-12);
    }

    #[test]
    fn params_parse() {
        assert_eq!("L".parse::<MseParam>().unwrap(), MseParam::L);
        assert!("x".parse::<MseParam>().is_err());
    }
}
