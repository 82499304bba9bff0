//! Backscatter device: waveform, reflection, blind timing and protocol frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::{ComplexSignal, OfdmConfig};

/// Reflection coefficient and BD-symbol length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdConfig {
    /// Complex reflection coefficient, `|alpha| <= 1`.
    pub alpha: Complex64,
    /// BD symbol length in OFDM symbols.
    pub k: usize,
}

impl Default for BdConfig {
    fn default() -> Self {
        Self {
            alpha: Complex64::new(0.3, 0.4),
            k: 1,
        }
    }
}

impl BdConfig {
    pub fn new(alpha: Complex64, k: usize) -> Result<Self> {
        let bd = Self { alpha, k };
        bd.validate()?;
        Ok(bd)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.norm() > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "|alpha| = {} exceeds 1; a passive tag cannot amplify",
                self.alpha.norm()
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        Ok(())
    }

    /// Samples per BD symbol, `K (N + Nc)`.
    pub fn symbol_len(&self, cfg: &OfdmConfig) -> usize {
        self.k * cfg.symbol_len()
    }
}

/// Durations (in samples) of the four phases of a BD frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSchedule {
    /// Wake-up preamble transmission.
    pub tw: usize,
    /// Blind timing synchronisation, `K1 (N + Nc)`.
    pub tb: usize,
    /// Training preamble transmission, `K2 (N + Nc)`.
    pub tt: usize,
    /// Device data transmission.
    pub td: usize,
}

impl ProtocolSchedule {
    /// Builds a schedule from OFDM-symbol counts. The wake-up phase carries
    /// `wake_bits` BD symbols and the data phase `data_bits` BD symbols.
    pub fn new(
        cfg: &OfdmConfig,
        bd: &BdConfig,
        wake_bits: usize,
        k1: usize,
        k2: usize,
        data_bits: usize,
    ) -> Result<Self> {
        if k1 == 0 || k2 == 0 {
            return Err(Error::Config("K1 and K2 must be positive".into()));
        }
        let p = cfg.symbol_len();
        Ok(Self {
            tw: wake_bits * bd.symbol_len(cfg),
            tb: k1 * p,
            tt: k2 * p,
            td: data_bits * bd.symbol_len(cfg),
        })
    }

    /// Total frame duration `Tw + Tb + Tt + Td`.
    pub fn tf(&self) -> usize {
        self.tw + self.tb + self.tt + self.td
    }

    /// Start offsets of the WUPT, BTS, TPT and DDT phases within the frame.
    pub fn phase_starts(&self) -> [usize; 4] {
        [0, self.tw, self.tw + self.tb, self.tw + self.tb + self.tt]
    }
}

/// Maps BD bits onto the `+-1` waveform.
///
/// Bit 0 holds `+1` for the whole BD symbol. Bit 1 is `+1` over the first
/// half of every OFDM symbol period and `-1` over the second half.
pub fn bd_waveform(bits: &[u8], bd: &BdConfig, cfg: &OfdmConfig) -> Result<Vec<f64>> {
    if bits.is_empty() {
        return Err(Error::Config("no bits to modulate".into()));
    }
    let p = cfg.symbol_len();
    if !p.is_multiple_of(2) {
        return Err(Error::Config(format!("N + Nc = {p} must be even")));
    }
    let half = p / 2;
    let mut out = Vec::with_capacity(bits.len() * bd.k * p);
    for &b in bits {
        for _ in 0..bd.k {
            match b {
                0 => out.extend(std::iter::repeat_n(1.0, p)),
                1 => {
                    out.extend(std::iter::repeat_n(1.0, half));
                    out.extend(std::iter::repeat_n(-1.0, half));
                }
                other => return Err(Error::Domain(format!("bit value {other} is not 0 or 1"))),
            }
        }
    }
    Ok(out)
}

/// A real-valued BD waveform placed on the global timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub values: Vec<f64>,
    pub start: i64,
}

impl Waveform {
    pub fn new(values: Vec<f64>, start: i64) -> Self {
        Self { values, start }
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }
}

/// Reflected signal `alpha * c[n] * x[n]`, defined on the waveform's span
/// and zero outside it.
pub fn backscatter(
    incident: &ComplexSignal,
    waveform: &Waveform,
    alpha: Complex64,
) -> Result<ComplexSignal> {
    if !incident.covers(waveform.start..waveform.end()) {
        return Err(Error::Alignment(format!(
            "waveform span [{}, {}) not covered by incident signal [{}, {})",
            waveform.start,
            waveform.end(),
            incident.start(),
            incident.end()
        )));
    }
    let c = incident.window(waveform.start..waveform.end())?;
    let out = c
        .iter()
        .zip(&waveform.values)
        .map(|(&s, &x)| alpha * s * x)
        .collect();
    Ok(ComplexSignal::from_parts(out, waveform.start))
}

/// CP-autocorrelation timing metric for lag `d`, pooled over `k1` symbols.
///
/// The per-sample products `|c[a] c*[a+N]|` are normalised by the
/// Cauchy-Schwarz bound `sqrt(sum |c[a]|^2 * sum |c[a+N]|^2)`, so the metric
/// is at most 1 and equals 1 exactly on a window where the CP repeats.
pub fn timing_metric(c: &ComplexSignal, cfg: &OfdmConfig, k1: usize, d: usize) -> Result<f64> {
    let (n, nc, p) = (cfg.n as i64, cfg.nc as i64, cfg.symbol_len() as i64);
    let mut num = 0.0;
    let mut e_head = 0.0;
    let mut e_tail = 0.0;
    for k in 0..k1 as i64 {
        let base = d as i64 + k * p;
        let head = c.window(base..base + nc)?;
        let tail = c.window(base + n..base + n + nc)?;
        for (a, b) in head.iter().zip(tail) {
            num += (a * b.conj()).norm();
            e_head += a.norm_sqr();
            e_tail += b.norm_sqr();
        }
    }
    let den = (e_head * e_tail).sqrt().max(1e-30);
    Ok(num / den)
}

/// Blind estimate of the delay of the first OFDM symbol boundary in `c`,
/// searched over `d in [0, Nc)`. `c` is indexed so that the source's first
/// symbol starts at global index 0. Ties go to the smallest `d`.
pub fn estimate_dh_blind(c: &ComplexSignal, cfg: &OfdmConfig, k1: usize) -> Result<usize> {
    if k1 == 0 {
        return Err(Error::Config("K1 must be positive".into()));
    }
    let needed = (k1 - 1) * cfg.symbol_len() + 2 * cfg.nc - 1 + cfg.n;
    if !c.covers(0..needed as i64) {
        return Err(Error::Range(format!(
            "blind timing needs samples [0, {needed}), signal covers [{}, {})",
            c.start(),
            c.end()
        )));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for d in 0..cfg.nc {
        let m = timing_metric(c, cfg, k1, d)?;
        if m > best.1 {
            best = (d, m);
        }
    }
    Ok(best.0)
}

/// Alternating `1, 0, 1, 0, ...` wake-up preamble.
pub fn wake_up_preamble(length_bits: usize) -> Vec<u8> {
    (0..length_bits).map(|i| ((i + 1) % 2) as u8).collect()
}
