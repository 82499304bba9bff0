//! Baseband OFDM source with cyclic prefix.
//!
//! Frequency-domain data are i.i.d. circularly-symmetric complex Gaussian
//! (CSCG). The inverse DFT is scaled by `1/sqrt(N)` so that unit-variance
//! subcarriers give unit time-domain power, and the result is multiplied by
//! `sqrt(p)`.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// OFDM numerology shared by every stage of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    /// Number of subcarriers (samples in the useful body of a symbol).
    pub n: usize,
    /// Cyclic prefix length in samples.
    pub nc: usize,
    /// Sampling rate in Hz.
    pub fs: f64,
    /// Average transmit power.
    pub p: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n: 512,
            nc: 64,
            fs: 10e6,
            p: 1.0,
        }
    }
}

impl OfdmConfig {
    pub fn new(n: usize, nc: usize, fs: f64, p: f64) -> Result<Self> {
        let cfg = Self { n, nc, fs, p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.nc == 0 {
            return Err(Error::Config("N and Nc must be positive".into()));
        }
        if self.nc >= self.n {
            return Err(Error::Config(format!(
                "CP length {} must be shorter than N = {}",
                self.nc, self.n
            )));
        }
        if !(self.n + self.nc).is_multiple_of(2) {
            return Err(Error::Config(format!(
                "N + Nc = {} must be even",
                self.n + self.nc
            )));
        }
        if !(self.p > 0.0 && self.p.is_finite()) || !(self.fs > 0.0 && self.fs.is_finite()) {
            return Err(Error::Config("p and fs must be positive and finite".into()));
        }
        Ok(())
    }

    /// Samples per OFDM symbol period, `N + Nc`.
    pub fn symbol_len(&self) -> usize {
        self.n + self.nc
    }
}

/// Complex baseband samples placed on the global discrete timeline.
///
/// `samples[i]` is the value at global index `start + i`; the signal is
/// implicitly zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    start: i64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, start: i64) -> Result<Self> {
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::Domain("signal contains non-finite samples".into()));
        }
        Ok(Self { samples, start })
    }

    /// Builds a signal without the finiteness scan. Callers guarantee finite input.
    pub(crate) fn from_parts(samples: Vec<Complex64>, start: i64) -> Self {
        Self { samples, start }
    }

    pub fn zeros(len: usize, start: i64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            start,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last global index covered.
    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample at global index `n`, if covered.
    pub fn get(&self, n: i64) -> Option<Complex64> {
        if n < self.start {
            return None;
        }
        self.samples.get((n - self.start) as usize).copied()
    }

    /// Sample at global index `n`, zero outside the covered span.
    pub fn at(&self, n: i64) -> Complex64 {
        self.get(n).unwrap_or_default()
    }

    /// Whether every index of `range` is covered.
    pub fn covers(&self, range: Range<i64>) -> bool {
        range.is_empty() || (range.start >= self.start && range.end <= self.end())
    }

    /// Borrow the samples at global indices `range`.
    pub fn window(&self, range: Range<i64>) -> Result<&[Complex64]> {
        if !self.covers(range.clone()) {
            return Err(Error::Range(format!(
                "window [{}, {}) outside signal span [{}, {})",
                range.start,
                range.end,
                self.start,
                self.end()
            )));
        }
        let lo = (range.start - self.start) as usize;
        let hi = (range.end - self.start) as usize;
        Ok(&self.samples[lo..hi])
    }

    /// Mean of `|x|^2` over all samples.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Pointwise sum over the union of both spans.
    pub fn add(&self, other: &ComplexSignal) -> ComplexSignal {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let start = self.start.min(other.start);
        let end = self.end().max(other.end());
        let mut out = ComplexSignal::zeros((end - start) as usize, start);
        out.accumulate(self);
        out.accumulate(other);
        out
    }

    /// Adds `other` into `self` wherever the spans overlap.
    pub fn accumulate(&mut self, other: &ComplexSignal) {
        let lo = self.start.max(other.start);
        let hi = self.end().min(other.end());
        for n in lo..hi {
            self.samples[(n - self.start) as usize] += other.samples[(n - other.start) as usize];
        }
    }

    /// Same samples, re-indexed so that global index `offset` becomes 0.
    pub fn shifted(&self, offset: i64) -> ComplexSignal {
        ComplexSignal {
            samples: self.samples.clone(),
            start: self.start - offset,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> ComplexSignal {
        ComplexSignal {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            start: self.start,
        }
    }
}

/// Draws one CSCG sample with the given variance.
pub fn cscg<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// OFDM symbol generator holding a reusable inverse-FFT plan.
#[derive(Clone)]
pub struct OfdmSource {
    cfg: OfdmConfig,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmSource")
            .field("cfg", &self.cfg)
            .finish()
    }
}

impl OfdmSource {
    pub fn new(cfg: OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let ifft = FftPlanner::new().plan_fft_inverse(cfg.n);
        Ok(Self { cfg, ifft })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    /// Generates `num_symbols` CP-OFDM symbols whose first sample sits at `start`.
    pub fn frame<R: Rng + ?Sized>(
        &self,
        num_symbols: usize,
        start: i64,
        rng: &mut R,
    ) -> Result<ComplexSignal> {
        if num_symbols == 0 {
            return Err(Error::Config("num_symbols must be at least 1".into()));
        }
        let (n, nc) = (self.cfg.n, self.cfg.nc);
        let gain = (self.cfg.p / n as f64).sqrt();
        let mut out = Vec::with_capacity(num_symbols * (n + nc));
        let mut body = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); self.ifft.get_inplace_scratch_len()];
        for _ in 0..num_symbols {
            for x in body.iter_mut() {
                *x = cscg(rng, 1.0);
            }
            self.ifft.process_with_scratch(&mut body, &mut scratch);
            for x in body.iter_mut() {
                *x *= gain;
            }
            out.extend_from_slice(&body[n - nc..]);
            out.extend_from_slice(&body);
        }
        Ok(ComplexSignal::from_parts(out, start))
    }
}

/// Generates a CP-OFDM frame starting at global index 0.
pub fn generate_ofdm_frame<R: Rng + ?Sized>(
    cfg: &OfdmConfig,
    num_symbols: usize,
    rng: &mut R,
) -> Result<ComplexSignal> {
    OfdmSource::new(*cfg)?.frame(num_symbols, 0, rng)
}

/// Checks `sig[j] == sig[j + N]` for every offset `j` in `window`, measured
/// from the start of OFDM symbol `symbol_index` (counted from the first sample
/// of `sig`). Equality is relative to 1e-12.
pub fn cp_window_equal(
    sig: &ComplexSignal,
    cfg: &OfdmConfig,
    symbol_index: usize,
    window: Range<usize>,
) -> Result<bool> {
    let p = cfg.symbol_len();
    if window.end + cfg.n > p {
        return Err(Error::Range(format!(
            "window [{}, {}) shifted by N = {} leaves the symbol period of {} samples",
            window.start, window.end, cfg.n, p
        )));
    }
    let base = sig.start() + (symbol_index * p) as i64;
    let s = sig.window(base..base + p as i64)?;
    Ok(window.into_iter().all(|j| {
        let (a, b) = (s[j], s[j + cfg.n]);
        (a - b).norm() <= 1e-12 * a.norm().max(b.norm())
    }))
}
