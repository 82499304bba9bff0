//! Receiver-side estimation of the minimum delay `D`, the maximum spread
//! `L` and the backscatter power `sigma_u^2`.
//!
//! All functions index `y` so that the first OFDM symbol of the phase being
//! processed starts at global index 0 (see [`ComplexSignal::shifted`]).

use crate::bd::estimate_dh_blind;
use crate::error::{Error, Result};
use crate::ofdm::{ComplexSignal, OfdmConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncEstimates {
    pub d_hat: usize,
    pub l_hat: usize,
    pub sigma_u2_hat: f64,
}

impl SyncEstimates {
    /// Repeating length implied by the estimates, at least 1.
    pub fn j_hat(&self, nc: usize) -> usize {
        (nc + self.d_hat + 1).saturating_sub(self.l_hat).max(1)
    }
}

/// Minimum channel delay from the CP autocorrelation of `y`.
pub fn estimate_d_min(y: &ComplexSignal, cfg: &OfdmConfig, k1: usize) -> Result<usize> {
    estimate_dh_blind(y, cfg, k1)
}

/// `Q[l]`: mean `|y[n] - y[n+N]|^2` over `n = l, ..., Nc-1` of `k2` OFDM
/// symbols.
pub fn q_metric(y: &ComplexSignal, l: usize, cfg: &OfdmConfig, k2: usize) -> Result<f64> {
    if l >= cfg.nc {
        return Err(Error::Range(format!(
            "l = {l} must be below Nc = {}",
            cfg.nc
        )));
    }
    if k2 == 0 {
        return Err(Error::Config("K2 must be positive".into()));
    }
    let (n, nc, p) = (cfg.n as i64, cfg.nc as i64, cfg.symbol_len() as i64);
    let mut acc = 0.0;
    for k in 0..k2 as i64 {
        let lo = l as i64 + k * p;
        let hi = nc + k * p;
        let head = y.window(lo..hi)?;
        let tail = y.window(lo + n..hi + n)?;
        acc += head
            .iter()
            .zip(tail)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
    }
    Ok(acc / (k2 * (cfg.nc - l)) as f64)
}

/// Mean and variance of `Q[l]` for single-tap links with spreads `lf`
/// (direct) and `lb` (backscatter, BD reflecting `+1`).
///
/// Sample `n` of the window is free of inter-symbol interference on a link
/// with spread `L'` iff `n >= L' - 1`. Otherwise the two ends of the
/// difference are independent and add the link power twice:
/// `2 sigma^2 gamma_d` for the direct link and `sigma^2 gamma` for the
/// backscatter link (`gamma` being the detection SNR). Every `|z|^2` is
/// exponential. When both links interfere, the direct term at `n` and the
/// backscatter term at `n + lb - lf` difference the same source samples, so
/// each such pair adds `2 (2 sigma^2 gamma_d)(sigma^2 gamma)` to the
/// summed covariance. With `lf == lb` the two terms share a sample and the
/// result is the average over their relative phase.
#[allow(clippy::too_many_arguments)]
pub fn q_metric_moments(
    l: usize,
    lf: usize,
    lb: usize,
    nc: usize,
    k2: usize,
    gamma: f64,
    gamma_d: f64,
    sigma2: f64,
) -> Result<(f64, f64)> {
    if l >= nc {
        return Err(Error::Range(format!("l = {l} must be below Nc = {nc}")));
    }
    if k2 == 0 {
        return Err(Error::Config("K2 must be positive".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for n in l..nc {
        let mut m = 2.0 * sigma2;
        if n + 1 < lf {
            m += 2.0 * sigma2 * gamma_d;
        }
        if n + 1 < lb {
            m += sigma2 * gamma;
        }
        sum += m;
        sum_sq += m * m;
    }
    let pairs = if lf == lb {
        0
    } else {
        (lf.min(lb) - 1).saturating_sub(l)
    };
    let cross = 2.0 * pairs as f64 * (2.0 * sigma2 * gamma_d) * (sigma2 * gamma);
    let w = (nc - l) as f64;
    Ok((sum / w, (sum_sq + cross) / (k2 as f64 * w * w)))
}

/// Maximum channel spread.
///
/// `Q[l]` sits at the noise floor exactly for `l >= L - 1`, so the estimate
/// is one past the first `l` with `Q[l] <= 2 epsilon sigma^2`. Returns `Nc`
/// when no `l` qualifies.
pub fn estimate_l(
    y: &ComplexSignal,
    cfg: &OfdmConfig,
    k2: usize,
    epsilon: f64,
    sigma2: f64,
) -> Result<usize> {
    if !(epsilon > 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must exceed 1")));
    }
    let floor = 2.0 * epsilon * sigma2;
    for l in 0..cfg.nc {
        if q_metric(y, l, cfg, k2)? <= floor {
            return Ok(l + 1);
        }
    }
    Ok(cfg.nc)
}

/// Raw and noise-compensated backscatter power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaU2Estimate {
    /// Mean `|z|^2` over the window; estimates `sigma_u^2 + sigma_v^2`.
    pub raw: f64,
    /// `max(raw - sigma_v^2, 0)`
    pub sigma_u2: f64,
}

/// Backscatter power from `symbols` training symbols on which the BD sends
/// bit 1, averaged over the window `[L_hat - 1, Nc + D_hat - 1]`.
pub fn estimate_sigma_u2(
    y: &ComplexSignal,
    cfg: &OfdmConfig,
    l_hat: usize,
    d_hat: usize,
    symbols: usize,
    sigma_v2: f64,
) -> Result<SigmaU2Estimate> {
    if symbols == 0 {
        return Err(Error::Config("no training symbols".into()));
    }
    let lo = l_hat.saturating_sub(1);
    let hi = cfg.nc + d_hat;
    if hi <= lo {
        return Err(Error::Geometry(format!(
            "empty window [{lo}, {hi}) for L_hat = {l_hat}, D_hat = {d_hat}"
        )));
    }
    let (n, p) = (cfg.n as i64, cfg.symbol_len() as i64);
    let mut acc = 0.0;
    for k in 0..symbols as i64 {
        let a = lo as i64 + k * p;
        let b = hi as i64 + k * p;
        let head = y.window(a..b)?;
        let tail = y.window(a + n..b + n)?;
        acc += head
            .iter()
            .zip(tail)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>();
    }
    let raw = acc / (symbols * (hi - lo)) as f64;
    Ok(SigmaU2Estimate {
        raw,
        sigma_u2: (raw - sigma_v2).max(0.0),
    })
}
