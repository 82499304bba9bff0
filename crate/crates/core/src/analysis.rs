//! Closed-form detection performance under the Gaussian (CLT) model of the
//! energy statistic.
//!
//! Every SNR argument is linear, never dB. Conversions live at the CLI
//! boundary ([`db_to_linear`], [`linear_to_db`]).

use crate::combining::{multiantenna_threshold, CombinerWeights};
use crate::detection::optimal_threshold;
use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Upper-tail probability of the standard normal distribution.
///
/// Computed as `erfc(x / sqrt 2) / 2` with the musl-derived `erfc`, whose
/// relative error is below 1 ulp over the whole real line, so the absolute
/// error stays far below 1e-12.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Conditional means and variances of the test statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mu0: f64,
    pub var0: f64,
    pub mu1: f64,
    pub var1: f64,
}

/// Gaussian-approximation moments of `R` under `B = 0` and `B = 1`.
pub fn statistic_moments(gamma: f64, j: usize) -> Moments {
    let j = j as f64;
    Moments {
        mu0: 1.0,
        var0: 1.0 / j,
        mu1: gamma + 1.0,
        var1: (gamma + 1.0).powi(2) / j,
    }
}

/// False-alarm and missed-detection probabilities and their average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerBreakdown {
    pub p_fa: f64,
    pub p_md: f64,
    pub p_e: f64,
}

impl BerBreakdown {
    pub fn new(p_fa: f64, p_md: f64) -> Self {
        Self {
            p_fa,
            p_md,
            p_e: 0.5 * (p_fa + p_md),
        }
    }
}

/// Single-antenna BER for an arbitrary threshold.
pub fn ber_closed_form(gamma: f64, j: usize, epsilon: f64) -> BerBreakdown {
    let sj = (j as f64).sqrt();
    BerBreakdown::new(
        q_function(sj * (epsilon - 1.0)),
        q_function(sj * (1.0 - epsilon / (gamma + 1.0))),
    )
}

/// Arguments `(f1, f2)` of the two Q-functions at the optimal threshold.
pub fn single_antenna_f(gamma: f64, j: usize) -> (f64, f64) {
    let eps = optimal_threshold(gamma, j);
    let sj = (j as f64).sqrt();
    (sj * (eps - 1.0), sj * (1.0 - eps / (gamma + 1.0)))
}

/// Minimum single-antenna BER, reached at the optimal threshold.
///
/// Depends on `gamma` and `J` only; the subcarrier count does not enter.
pub fn min_ber_single(gamma: f64, j: usize) -> BerBreakdown {
    let (f1, f2) = single_antenna_f(gamma, j);
    BerBreakdown::new(q_function(f1), q_function(f2))
}

/// Means and variances of the combined statistic for weights `theta`.
pub fn combined_moments(theta: &[f64], gamma: &[f64], j: usize) -> Moments {
    let mut mu0 = 0.0;
    let mut mu1 = 0.0;
    let mut s = 0.0;
    for (&t, &g) in theta.iter().zip(gamma) {
        mu0 += t;
        mu1 += t * (g + 1.0);
        s += t * t * (g + 1.0) * (g + 1.0);
    }
    Moments {
        mu0,
        var0: 1.0 / j as f64,
        mu1,
        var1: s / j as f64,
    }
}

/// `(f1, f2)` for the combined statistic at the threshold of
/// [`multiantenna_threshold`].
pub fn multi_antenna_f(theta: &CombinerWeights, gamma: &[f64], j: usize) -> Result<(f64, f64)> {
    let eps = multiantenna_threshold(theta, gamma, j)?;
    let m = combined_moments(theta.as_slice(), gamma, j);
    Ok(((eps - m.mu0) / m.var0.sqrt(), (m.mu1 - eps) / m.var1.sqrt()))
}

/// Minimum BER of the combined statistic for fixed weights.
pub fn min_ber_multi(theta: &CombinerWeights, gamma: &[f64], j: usize) -> Result<BerBreakdown> {
    let (f1, f2) = multi_antenna_f(theta, gamma, j)?;
    Ok(BerBreakdown::new(q_function(f1), q_function(f2)))
}

/// High-SNR approximations `(P_fa, P_md)` of the minimum-BER components.
pub fn ber_approximations(gamma: f64, j: usize) -> (f64, f64) {
    let j = j as f64;
    (
        q_function((j + 2.0 * gamma.ln_1p()).sqrt()),
        q_function(j.sqrt()),
    )
}

/// BD data rate in bit/s, `fs / (K (N + Nc))`.
pub fn bd_rate(fs: f64, n: usize, nc: usize, k: usize) -> Result<f64> {
    if !(fs > 0.0) || n == 0 || nc == 0 || k == 0 {
        return Err(Error::Domain("rate arguments must be positive".into()));
    }
    Ok(fs / (k * (n + nc)) as f64)
}
