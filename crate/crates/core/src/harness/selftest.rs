//! Fast invariant checks runnable from the CLI.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::sweep::count_errors;
use super::trial::TrialRunner;
use crate::analysis::{min_ber_single, multi_antenna_f, single_antenna_f};
use crate::bd::{backscatter, bd_waveform, Waveform};
use crate::channel::{apply_channel, ChannelSet};
use crate::combining::{multiantenna_threshold, CombinerWeights};
use crate::detection::{difference_signal, optimal_threshold, DetectorConfig};
use crate::error::Result;
use crate::ofdm::{cp_window_equal, OfdmSource};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn cp_repetition(cfg: &ExperimentConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = OfdmSource::new(cfg.ofdm)?.frame(8, 0, &mut rng)?;
    let mut ok = true;
    for k in 0..8 {
        ok &= cp_window_equal(&s, &cfg.ofdm, k, 0..cfg.ofdm.nc)?;
    }
    Ok(CheckResult::new("cp repetition", ok, "8 symbols".into()))
}

fn cancellation(cfg: &ExperimentConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 1);
    let src = OfdmSource::new(cfg.ofdm)?;
    let profile = cfg.profile_at(cfg.distance)?;
    let p = cfg.ofdm.symbol_len() as i64;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ch = ChannelSet::sample(&cfg.ofdm, &profile, 1, &mut rng)?;
        let det = DetectorConfig::from_geometry(&ch.geometry, &cfg.ofdm, 1)?;
        let s = src.frame(3, -p, &mut rng)?;
        let c = apply_channel(&s, &ch.h)?;
        let x = Waveform::new(
            bd_waveform(&[0], &cfg.bd, &cfg.ofdm)?,
            ch.geometry.dh as i64,
        );
        let b = backscatter(&c, &x, cfg.bd.alpha)?;
        let y = apply_channel(&s, &ch.f[0])?.add(&apply_channel(&b, &ch.g_cir(0))?);
        let z = difference_signal(&y, &cfg.ofdm, &det, 0)?;
        let zmax = z.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let ymax = y.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
        worst = worst.max(zmax / ymax);
    }
    Ok(CheckResult::new(
        "interference cancellation",
        worst <= 1e-12,
        format!("max |z| / max |y| = {worst:.3e}"),
    ))
}

fn identities() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &g in &[0.1, 1.0, 3.0, 30.0, 1000.0] {
        for &j in &[10usize, 59, 200] {
            let (f1, f2) = single_antenna_f(g, j);
            worst = worst.max((f1 * f1 - f2 * f2 - 2.0 * g.ln_1p()).abs());
            let w = CombinerWeights::new(vec![0.6, 0.8])?;
            let gm = [g, 0.5 * g];
            let (h1, h2) = multi_antenna_f(&w, &gm, j)?;
            let c = 1.0 + 0.36 * gm[0] * (gm[0] + 2.0) + 0.64 * gm[1] * (gm[1] + 2.0);
            worst = worst.max((h1 * h1 - h2 * h2 - c.ln()).abs());
            let single = multiantenna_threshold(&CombinerWeights::single(), &[g], j)?;
            worst = worst.max((single - optimal_threshold(g, j)).abs());
        }
    }
    Ok(CheckResult::new(
        "threshold identities",
        worst < 1e-9,
        format!("max residual {worst:.3e}"),
    ))
}

fn monotonicity() -> CheckResult {
    let mut ok = true;
    for &g in &[0.5, 3.0, 100.0] {
        for j in 10..200 {
            ok &= optimal_threshold(g, j + 1) <= optimal_threshold(g, j) + 1e-15;
            ok &= min_ber_single(g, j + 1).p_e <= min_ber_single(g, j).p_e;
        }
    }
    CheckResult::new(
        "monotone in J",
        ok,
        "gamma in {0.5, 3, 100}, J in 10..200".into(),
    )
}

fn determinism(cfg: &ExperimentConfig) -> Result<CheckResult> {
    let runner = TrialRunner::for_snr(cfg, 10.0)?;
    let a = count_errors(&runner, cfg.seed, 0, 200)?;
    let b = count_errors(&runner, cfg.seed, 0, 200)?;
    Ok(CheckResult::new(
        "determinism",
        a == b,
        format!("{a} and {b} errors in 200 trials"),
    ))
}

/// Runs every check; none of them is statistical.
pub fn selftest(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    Ok(vec![
        cp_repetition(cfg)?,
        cancellation(cfg)?,
        identities()?,
        monotonicity(),
        determinism(cfg)?,
    ])
}
