use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bd::BdConfig;
use crate::channel::{pathloss_gain, propagation_delay_samples, ChannelProfile, PathProfile};
use crate::combining::CombinerScheme;
use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Proposed,
    Benchmark,
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Proposed => "proposed",
            Self::Benchmark => "benchmark",
        })
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(Self::Proposed),
            "benchmark" => Ok(Self::Benchmark),
            _ => Err(Error::Parse(format!("unknown detector '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncMode {
    /// Detector uses the true delays and SNRs.
    Genie,
    /// Detector runs the blind timing, spread and power estimators first.
    Estimated,
}

impl fmt::Display for SyncMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Genie => "genie",
            Self::Estimated => "estimated",
        })
    }
}

impl FromStr for SyncMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "genie" => Ok(Self::Genie),
            "estimated" => Ok(Self::Estimated),
            _ => Err(Error::Parse(format!("unknown sync mode '{s}'"))),
        }
    }
}

/// Everything a sweep needs. Every field has a default, so a config file
/// only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ofdm: OfdmConfig,
    pub bd: BdConfig,
    /// Carrier frequency in Hz.
    pub fc: f64,
    /// BD to receiver distance in metres.
    pub distance: f64,
    /// Direct-link delay and tap count.
    pub df: usize,
    pub taps_f: usize,
    /// Source to BD delay and tap count.
    pub dh: usize,
    pub taps_h: usize,
    /// Exponential PDP decay constant in taps.
    pub decay: f64,
    /// `E[sum |h|^2]`
    pub gain_h: f64,
    /// Mean direct-link SNR above the mean detection SNR, in dB.
    pub direct_margin_db: f64,
    /// BD-side SNR of the incident signal above the mean detection SNR, in dB.
    pub bd_margin_db: f64,
    pub antennas: usize,
    /// Mean detection SNR grid in dB.
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub detector: DetectorKind,
    pub combiner: CombinerScheme,
    pub sync_mode: SyncMode,
    /// Blind timing duration in OFDM symbols.
    pub k1: usize,
    /// Training duration in OFDM symbols.
    pub k2: usize,
    /// Threshold factor of the spread estimator.
    pub l_epsilon: f64,
    /// Angular step of the optimal-combiner search, in radians.
    pub grid_step: f64,
    /// Known reflect and silent symbols per state for the benchmark detector.
    pub training_symbols: usize,
    /// Channel draws used to average the closed-form BER over fading.
    pub analytic_draws: usize,
    /// Distance grid for distance sweeps, in metres.
    pub distances: Vec<f64>,
    /// Mean detection SNR at `distance`, fixing the noise power of a
    /// distance sweep.
    pub distance_ref_snr_db: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            bd: BdConfig::default(),
            fc: 900e6,
            distance: 0.5,
            df: 16,
            taps_f: 4,
            dh: 16,
            taps_h: 6,
            decay: 1.0,
            gain_h: 1.0,
            direct_margin_db: 20.0,
            bd_margin_db: 20.0,
            antennas: 1,
            snr_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 100_000,
            seed: 1,
            detector: DetectorKind::Proposed,
            combiner: CombinerScheme::Optimal,
            sync_mode: SyncMode::Genie,
            k1: 1,
            k2: 1,
            l_epsilon: 1.5,
            grid_step: 0.001,
            training_symbols: 4,
            analytic_draws: 20_000,
            distances: vec![0.5, 1.0, 1.4, 2.0, 4.0, 7.0, 10.0, 14.0, 20.0],
            distance_ref_snr_db: 30.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.bd.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::Config("snr_grid is empty".into()));
        }
        if self.antennas == 0 {
            return Err(Error::Config("at least one antenna required".into()));
        }
        if self.taps_f == 0 || self.taps_h == 0 {
            return Err(Error::Config("tap counts must be positive".into()));
        }
        if self.k1 == 0 || self.k2 == 0 {
            return Err(Error::Config("K1 and K2 must be positive".into()));
        }
        if !(self.l_epsilon > 1.0) {
            return Err(Error::Config("l_epsilon must exceed 1".into()));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return Err(Error::Config("grid_step must lie in (0, 1]".into()));
        }
        if self.training_symbols == 0 || self.analytic_draws == 0 {
            return Err(Error::Config(
                "training_symbols and analytic_draws must be positive".into(),
            ));
        }
        if !(self.decay > 0.0 && self.gain_h > 0.0) {
            return Err(Error::Config("decay and gain_h must be positive".into()));
        }
        // +inf is a noiseless point
        if self
            .snr_grid
            .iter()
            .any(|x| x.is_nan() || *x == f64::NEG_INFINITY)
        {
            return Err(Error::Config(
                "snr_grid entries must be numbers or +inf".into(),
            ));
        }
        pathloss_gain(self.distance, self.fc)?;
        for &d in &self.distances {
            pathloss_gain(d, self.fc)?;
        }
        // checks the CP covers the channel spread
        self.profile_at(self.distance)?;
        Ok(())
    }

    /// `E|g|^2` at distance `d`.
    pub fn gain_g(&self, d: f64) -> Result<f64> {
        pathloss_gain(d, self.fc)
    }

    /// `E[sum |f|^2]`, set so that the mean direct-link SNR sits
    /// `direct_margin_db` above the mean detection SNR at the reference
    /// distance. It does not depend on the noise power.
    pub fn gain_f(&self) -> Result<f64> {
        Ok(10f64.powf(self.direct_margin_db / 10.0)
            * 2.0
            * self.bd.alpha.norm_sqr()
            * self.gain_g(self.distance)?
            * self.gain_h)
    }

    /// Channel statistics with the BD at distance `d`.
    pub fn profile_at(&self, d: f64) -> Result<ChannelProfile> {
        let profile = ChannelProfile {
            f: PathProfile::new(self.df, self.taps_f),
            h: PathProfile::new(self.dh, self.taps_h),
            dg: propagation_delay_samples(d, self.ofdm.fs),
            decay: self.decay,
            gain_f: self.gain_f()?,
            gain_h: self.gain_h,
            gain_g: self.gain_g(d)?,
        };
        crate::channel::derive_geometry(
            &self.ofdm,
            profile.f,
            profile.h,
            PathProfile::new(profile.dg, 1),
        )?;
        Ok(profile)
    }

    /// Noise power giving mean detection SNR `gamma_bar` (linear) at
    /// distance `d`: `E[gamma] = 2 p |alpha|^2 E|g|^2 E[sum |h|^2] / sigma^2`.
    pub fn noise_power(&self, gamma_bar: f64, d: f64) -> Result<f64> {
        if !(gamma_bar > 0.0) {
            return Err(Error::Domain("mean SNR must be positive".into()));
        }
        Ok(
            2.0 * self.ofdm.p * self.bd.alpha.norm_sqr() * self.gain_g(d)? * self.gain_h
                / gamma_bar,
        )
    }
}
