//! Closed-form BER averaged over Rayleigh fading.
//!
//! Each draw scales the mean SNR by the normalised channel gains,
//! `gamma_m = gamma_bar |g_m|^2 / E|g|^2 * sum|h|^2 / E[sum|h|^2]`, and the
//! closed-form minimum BER is averaged over the draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::analysis::{db_to_linear, min_ber_multi, min_ber_single};
use crate::channel::sample_rayleigh_cir;
use crate::combining::{weights_for, CombinerScheme};
use crate::error::{Error, Result};
use crate::ofdm::cscg;

/// Normalised fading gains, shared across SNR points so that curves are
/// smooth and differences between schemes are low-noise.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraws {
    /// `sum |h|^2 / E[sum |h|^2]` per draw.
    pub h: Vec<f64>,
    /// `|g_m|^2 / E|g|^2` per draw and antenna.
    pub g: Vec<Vec<f64>>,
}

impl FadingDraws {
    pub fn sample(
        cfg: &ExperimentConfig,
        count: usize,
        antennas: usize,
        seed: u64,
    ) -> Result<Self> {
        if count == 0 || antennas == 0 {
            return Err(Error::Config(
                "need at least one draw and one antenna".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = Vec::with_capacity(count);
        let mut g = Vec::with_capacity(count);
        for _ in 0..count {
            h.push(sample_rayleigh_cir(cfg.taps_h, cfg.decay, 1.0, 0, &mut rng)?.energy());
            g.push(
                (0..antennas)
                    .map(|_| cscg(&mut rng, 1.0).norm_sqr())
                    .collect(),
            );
        }
        Ok(Self { h, g })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn antennas(&self) -> usize {
        self.g.first().map_or(0, Vec::len)
    }

    /// Per-antenna SNRs of draw `i` at mean SNR `gamma_bar`.
    pub fn gamma(&self, i: usize, gamma_bar: f64) -> Vec<f64> {
        self.g[i]
            .iter()
            .map(|g| gamma_bar * g * self.h[i])
            .collect()
    }
}

/// Fading-averaged minimum BER at mean SNR `gamma_bar` (linear).
pub fn average_ber(
    draws: &FadingDraws,
    gamma_bar: f64,
    j_total: usize,
    scheme: CombinerScheme,
    grid_step: f64,
) -> Result<f64> {
    let per: Vec<f64> = (0..draws.len())
        .into_par_iter()
        .map(|i| {
            let gamma = draws.gamma(i, gamma_bar);
            if gamma.len() == 1 {
                return Ok(min_ber_single(gamma[0], j_total).p_e);
            }
            let w = weights_for(scheme, &gamma, j_total, grid_step)?;
            Ok(min_ber_multi(&w, &gamma, j_total)?.p_e)
        })
        .collect::<Result<_>>()?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

/// Mean SNR in dB at which the fading-averaged BER equals `target`,
/// by bisection on `[lo_db, hi_db]`.
pub fn snr_at_ber(
    draws: &FadingDraws,
    target: f64,
    j_total: usize,
    scheme: CombinerScheme,
    grid_step: f64,
    lo_db: f64,
    hi_db: f64,
) -> Result<f64> {
    let f = |db: f64| average_ber(draws, db_to_linear(db), j_total, scheme, grid_step);
    let (mut lo, mut hi) = (lo_db, hi_db);
    if f(lo)? < target || f(hi)? > target {
        return Err(Error::Range(format!(
            "BER {target} not bracketed by [{lo_db}, {hi_db}] dB"
        )));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
