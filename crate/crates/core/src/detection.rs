//! Interference-cancelling test statistic and maximum-likelihood detection.
//!
//! Within the window `n = L-1, ..., Nc+D-1` of every OFDM symbol, both the
//! direct-link signal and the backscattered signal repeat at lag `N`; the
//! backscattered part flips sign when the BD sends bit 1. The difference
//! `z[n] = y[n] - y[n+N]` therefore holds only noise for bit 0 and
//! `u[n] + v[n]` for bit 1.

use num_complex::Complex64;

use crate::bd::BdConfig;
use crate::channel::{ChannelGeometry, ChannelSet};
use crate::error::{Error, Result};
use crate::ofdm::{ComplexSignal, OfdmConfig};

/// Noise and signal powers seen by the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    /// Per-antenna noise power.
    pub sigma2: f64,
    /// Difference-noise power, `2 sigma2`.
    pub sigma_v2: f64,
    /// Per-antenna backscatter power in the difference domain.
    pub sigma_u2: Vec<f64>,
    /// Per-antenna detection SNR, `sigma_u2 / sigma_v2`.
    pub gamma: Vec<f64>,
    /// Per-antenna direct-link SNR, `p sum |f|^2 / sigma2`.
    pub gamma_d: Vec<f64>,
}

impl LinkStats {
    pub fn new(sigma2: f64, sigma_u2: Vec<f64>, gamma_d: Vec<f64>) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::Domain("noise power must be positive".into()));
        }
        if sigma_u2.iter().chain(&gamma_d).any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("signal powers must be nonnegative".into()));
        }
        let sigma_v2 = 2.0 * sigma2;
        let gamma = sigma_u2.iter().map(|s| s / sigma_v2).collect();
        Ok(Self {
            sigma2,
            sigma_v2,
            sigma_u2,
            gamma,
            gamma_d,
        })
    }

    /// Exact powers for a channel realisation:
    /// `sigma_u,m^2 = 4 p |alpha|^2 |g_m|^2 sum |h[l]|^2`.
    pub fn from_channels(
        cfg: &OfdmConfig,
        bd: &BdConfig,
        channels: &ChannelSet,
        sigma2: f64,
    ) -> Result<Self> {
        let eh = channels.h.energy();
        let a2 = bd.alpha.norm_sqr();
        let sigma_u2 = channels
            .g
            .iter()
            .map(|g| 4.0 * cfg.p * a2 * g.norm_sqr() * eh)
            .collect();
        let gamma_d = channels
            .f
            .iter()
            .map(|f| cfg.p * f.energy() / sigma2)
            .collect();
        Self::new(sigma2, sigma_u2, gamma_d)
    }
}

/// Detection window geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorConfig {
    /// Repeating length per OFDM symbol.
    pub j: usize,
    /// First window index, `L - 1`, relative to an OFDM symbol start.
    pub window_start: usize,
    /// Last window index (inclusive), `Nc + D - 1`.
    pub window_end: usize,
    /// OFDM symbols per BD symbol.
    pub k: usize,
}

impl DetectorConfig {
    pub fn new(window_start: usize, window_end: usize, k: usize) -> Result<Self> {
        if window_end < window_start {
            return Err(Error::Geometry(format!(
                "empty detection window [{window_start}, {window_end}]"
            )));
        }
        if k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        Ok(Self {
            j: window_end - window_start + 1,
            window_start,
            window_end,
            k,
        })
    }

    pub fn from_geometry(geometry: &ChannelGeometry, cfg: &OfdmConfig, k: usize) -> Result<Self> {
        Self::new(geometry.window_start(), geometry.window_end(cfg.nc), k)
    }

    /// Samples pooled into one BD-symbol decision, `K J`.
    pub fn j_total(&self) -> usize {
        self.k * self.j
    }
}

/// `z[n] = y[n] - y[n+N]` over the detection window of OFDM symbol
/// `symbol_index` (the symbol whose source-side start is at
/// `symbol_index * (N + Nc)` on the global timeline).
pub fn difference_signal(
    y: &ComplexSignal,
    cfg: &OfdmConfig,
    det: &DetectorConfig,
    symbol_index: i64,
) -> Result<ComplexSignal> {
    let base = symbol_index * cfg.symbol_len() as i64;
    let lo = base + det.window_start as i64;
    let hi = base + det.window_end as i64 + 1;
    let head = y.window(lo..hi)?;
    let tail = y.window(lo + cfg.n as i64..hi + cfg.n as i64)?;
    let z = head.iter().zip(tail).map(|(a, b)| a - b).collect();
    Ok(ComplexSignal::from_parts(z, lo))
}

/// Windows of all `K` OFDM symbols of the BD symbol that starts at OFDM
/// symbol `first_symbol`.
pub fn bd_symbol_windows(
    y: &ComplexSignal,
    cfg: &OfdmConfig,
    det: &DetectorConfig,
    first_symbol: i64,
) -> Result<Vec<ComplexSignal>> {
    (0..det.k as i64)
        .map(|k| difference_signal(y, cfg, det, first_symbol + k))
        .collect()
}

/// Energy statistic `R = sum |z[n]|^2 / (J_total sigma_v^2)`.
pub fn test_statistic<S: AsRef<[Complex64]>>(
    windows: &[S],
    j_total: usize,
    sigma_v2: f64,
) -> Result<f64> {
    if j_total == 0 {
        return Err(Error::Geometry("repeating length is zero".into()));
    }
    let count: usize = windows.iter().map(|w| w.as_ref().len()).sum();
    if count != j_total {
        return Err(Error::Dimension(format!(
            "windows hold {count} samples, expected {j_total}"
        )));
    }
    let energy: f64 = windows
        .iter()
        .flat_map(|w| w.as_ref().iter())
        .map(|z| z.norm_sqr())
        .sum();
    Ok(energy / (j_total as f64 * sigma_v2))
}

impl AsRef<[Complex64]> for ComplexSignal {
    fn as_ref(&self) -> &[Complex64] {
        self.samples()
    }
}

/// Optimal single-antenna threshold: the upper intersection of
/// `N(1, 1/J)` and `N(gamma + 1, (gamma + 1)^2 / J)`.
///
/// Evaluated as `(g+1)/(g+2) (1 + sqrt(1 + 2 (g+2) ln(1+g) / (g J)))`, which
/// is algebraically identical to the textbook form and continuous at
/// `gamma = 0`, where it equals `(1 + sqrt(1 + 4/J)) / 2`.
pub fn optimal_threshold(gamma: f64, j: usize) -> f64 {
    let g = gamma.max(0.0);
    let log_ratio = if g == 0.0 { 1.0 } else { g.ln_1p() / g };
    (g + 1.0) / (g + 2.0) * (1.0 + (1.0 + 2.0 * (g + 2.0) * log_ratio / j as f64).sqrt())
}

/// ML decision: 0 if `R < epsilon`, else 1.
pub fn ml_detect(r: f64, epsilon: f64) -> u8 {
    if r < epsilon {
        0
    } else {
        1
    }
}

/// Upper intersection of `N(mu0, var1 / c)` and `N(mu1, var1)` where
/// `c - 1 = c_minus_1 >= 0` and `mu1 >= mu0`.
///
/// Solves `(c-1) T^2 - 2 (c mu0 - mu1) T + c mu0^2 - mu1^2 - var1 ln c = 0`
/// picking the cancellation-free form of the larger root. With equal
/// variances the root is the midpoint.
pub(crate) fn gaussian_intersection(mu0: f64, mu1: f64, c_minus_1: f64, var1: f64) -> f64 {
    let a = c_minus_1;
    let delta = mu1 - mu0;
    if a <= 0.0 {
        return 0.5 * (mu0 + mu1);
    }
    let c = 1.0 + a;
    let ln_c = a.ln_1p();
    let b = a * mu0 - delta;
    let disc = c * delta * delta + a * var1 * ln_c;
    if b >= 0.0 {
        (b + disc.sqrt()) / a
    } else {
        let c0 = a * mu0 * mu0 - delta * (mu0 + mu1) - var1 * ln_c;
        c0 / (b - disc.sqrt())
    }
}

/// Mean received power over `len` samples starting at global index `start`.
pub fn symbol_energy(y: &ComplexSignal, start: i64, len: usize) -> Result<f64> {
    if len == 0 {
        return Err(Error::Range("empty energy window".into()));
    }
    let w = y.window(start..start + len as i64)?;
    Ok(w.iter().map(|s| s.norm_sqr()).sum::<f64>() / len as f64)
}

/// Conventional energy-level detector used as the benchmark.
///
/// The BD reflects (state 1) or stays silent (state 0) for a whole BD
/// symbol; data are differentially encoded so a change of state carries
/// bit 1 and the receiver need not know which energy level maps to which
/// state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDetector {
    /// Midpoint between the trained reflect and silent energy levels.
    pub threshold: f64,
}

impl EnergyDetector {
    /// Trains the level threshold from energies measured on known reflect
    /// and silent symbols.
    pub fn train(reflect: &[f64], silent: &[f64]) -> Result<Self> {
        if reflect.is_empty() || silent.is_empty() {
            return Err(Error::Dimension("training needs both energy levels".into()));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok(Self {
            threshold: 0.5 * (mean(reflect) + mean(silent)),
        })
    }

    /// Energy level of one symbol: 1 above the threshold, else 0.
    pub fn level(&self, energy: f64) -> u8 {
        u8::from(energy > self.threshold)
    }

    /// Differential decoding: bit 1 iff the level changed.
    pub fn decode(&self, previous_energy: f64, energy: f64) -> u8 {
        self.level(previous_energy) ^ self.level(energy)
    }
}

/// Benchmark energy level of the BD symbol whose samples start at
/// `start`: averages `|y|^2` over `K (N + Nc)` samples and compares against
/// the trained threshold.
pub fn benchmark_energy_detect(
    y: &ComplexSignal,
    cfg: &OfdmConfig,
    k: usize,
    start: i64,
    trained_threshold: f64,
) -> Result<u8> {
    let e = symbol_energy(y, start, k * cfg.symbol_len())?;
    Ok(EnergyDetector {
        threshold: trained_threshold,
    }
    .level(e))
}
