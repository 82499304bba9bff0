//! One Monte Carlo realisation of the link.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{DetectorKind, ExperimentConfig, SyncMode};
use crate::analysis::db_to_linear;
use crate::bd::{backscatter, bd_waveform, estimate_dh_blind, Waveform};
use crate::channel::{apply_channel, ChannelProfile, ChannelSet};
use crate::combining::{combine_statistics, multiantenna_threshold, weights_for};
use crate::detection::{
    bd_symbol_windows, ml_detect, optimal_threshold, symbol_energy, test_statistic, DetectorConfig,
    EnergyDetector, LinkStats,
};
use crate::error::Result;
use crate::ofdm::{cscg, ComplexSignal, OfdmSource};
use crate::sync::{estimate_d_min, estimate_l, estimate_sigma_u2};

/// Independent stream for trial `trial` of grid point `point`.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub sent: u8,
    pub detected: u8,
    /// True per-antenna detection SNR of the draw.
    pub gamma: Vec<f64>,
}

/// Estimates produced by one pass of the synchronisation phases, with the
/// true values they target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncTrial {
    pub dh: usize,
    pub dh_hat: usize,
    pub d: usize,
    pub d_hat: usize,
    pub l: usize,
    pub l_hat: usize,
    pub sigma_u2: f64,
    pub sigma_u2_raw: f64,
    pub sigma_u2_hat: f64,
}

/// A configuration bound to one operating point (noise power and channel
/// statistics), reusable across trials and threads.
#[derive(Debug, Clone)]
pub struct TrialRunner {
    cfg: ExperimentConfig,
    source: OfdmSource,
    profile: ChannelProfile,
    sigma2: f64,
    bd_sigma2: f64,
    mean_gamma: f64,
}

impl TrialRunner {
    /// Operating point with mean detection SNR `snr_db` at the configured
    /// distance. `snr_db = +inf` gives a noiseless link.
    pub fn for_snr(cfg: &ExperimentConfig, snr_db: f64) -> Result<Self> {
        cfg.validate()?;
        let gamma_bar = db_to_linear(snr_db);
        let sigma2 = if gamma_bar.is_infinite() {
            0.0
        } else {
            cfg.noise_power(gamma_bar, cfg.distance)?
        };
        Self::build(cfg, cfg.distance, sigma2, gamma_bar)
    }

    /// BD at distance `d`; the noise power is fixed by
    /// `distance_ref_snr_db` at the configured reference distance.
    pub fn for_distance(cfg: &ExperimentConfig, d: f64) -> Result<Self> {
        cfg.validate()?;
        let sigma2 = cfg.noise_power(db_to_linear(cfg.distance_ref_snr_db), cfg.distance)?;
        let gamma_bar =
            db_to_linear(cfg.distance_ref_snr_db) * cfg.gain_g(d)? / cfg.gain_g(cfg.distance)?;
        Self::build(cfg, d, sigma2, gamma_bar)
    }

    fn build(cfg: &ExperimentConfig, d: f64, sigma2: f64, gamma_bar: f64) -> Result<Self> {
        let profile = cfg.profile_at(d)?;
        let bd_sigma2 = if sigma2 == 0.0 {
            0.0
        } else {
            cfg.ofdm.p * cfg.gain_h / (gamma_bar * db_to_linear(cfg.bd_margin_db))
        };
        Ok(Self {
            cfg: cfg.clone(),
            source: OfdmSource::new(cfg.ofdm)?,
            profile,
            sigma2,
            bd_sigma2,
            mean_gamma: gamma_bar,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn profile(&self) -> &ChannelProfile {
        &self.profile
    }

    /// Ensemble-average detection SNR of this operating point (linear).
    pub fn mean_gamma(&self) -> f64 {
        self.mean_gamma
    }

    /// Draws channels, sends one random BD bit and detects it.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialResult> {
        match self.cfg.detector {
            DetectorKind::Benchmark => self.run_benchmark(rng),
            DetectorKind::Proposed => match self.cfg.sync_mode {
                SyncMode::Genie => self.run_genie(rng),
                SyncMode::Estimated => self.run_estimated(rng),
            },
        }
    }

    /// Noise power assumed by the detector. A noiseless link still needs a
    /// finite SNR for the threshold, so it gets one 300 dB below the signal.
    fn detector_noise(&self) -> f64 {
        if self.sigma2 > 0.0 {
            self.sigma2
        } else {
            self.cfg.ofdm.p * self.cfg.gain_h * 1e-30
        }
    }

    fn channels<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(ChannelSet, LinkStats)> {
        let ch = ChannelSet::sample(&self.cfg.ofdm, &self.profile, self.cfg.antennas, rng)?;
        let stats =
            LinkStats::from_channels(&self.cfg.ofdm, &self.cfg.bd, &ch, self.detector_noise())?;
        Ok((ch, stats))
    }

    /// Received signal of antenna `m` over `[lo, hi)`.
    #[allow(clippy::too_many_arguments)]
    fn receive<R: Rng + ?Sized>(
        &self,
        direct: &ComplexSignal,
        reflected: &ComplexSignal,
        ch: &ChannelSet,
        m: usize,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Result<ComplexSignal> {
        let mut y = ComplexSignal::zeros((hi - lo) as usize, lo);
        y.accumulate(&apply_channel(direct, &ch.f[m])?);
        y.accumulate(&apply_channel(reflected, &ch.g_cir(m))?);
        if self.sigma2 > 0.0 {
            for s in y.samples_mut() {
                *s += cscg(rng, self.sigma2);
            }
        }
        Ok(y)
    }

    /// Combines per-antenna statistics and applies the matching threshold.
    fn decide(&self, r: &[f64], gamma: &[f64], j_total: usize) -> Result<u8> {
        if r.len() == 1 {
            return Ok(ml_detect(r[0], optimal_threshold(gamma[0], j_total)));
        }
        let w = weights_for(self.cfg.combiner, gamma, j_total, self.cfg.grid_step)?;
        let rc = combine_statistics(r, &w)?;
        Ok(ml_detect(rc, multiantenna_threshold(&w, gamma, j_total)?))
    }

    fn run_genie<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialResult> {
        let ofdm = &self.cfg.ofdm;
        let k = self.cfg.bd.k;
        let p = ofdm.symbol_len() as i64;
        let (ch, stats) = self.channels(rng)?;
        let geo = ch.geometry;
        let det = DetectorConfig::from_geometry(&geo, ofdm, k)?;
        let sent: u8 = rng.random_range(0..2);

        let s = self.source.frame(k + 1, -p, rng)?;
        let c = apply_channel(&s, &ch.h)?;
        let x = Waveform::new(bd_waveform(&[sent], &self.cfg.bd, ofdm)?, geo.dh as i64);
        let b = backscatter(&c, &x, self.cfg.bd.alpha)?;

        let lo = det.window_start as i64;
        let hi = (k as i64 - 1) * p + det.window_end as i64 + ofdm.n as i64 + 1;
        let mut r = Vec::with_capacity(ch.antennas());
        for m in 0..ch.antennas() {
            let y = self.receive(&s, &b, &ch, m, lo, hi, rng)?;
            let w = bd_symbol_windows(&y, ofdm, &det, 0)?;
            r.push(test_statistic(&w, det.j_total(), stats.sigma_v2)?);
        }
        let detected = self.decide(&r, &stats.gamma, det.j_total())?;
        Ok(TrialResult {
            sent,
            detected,
            gamma: stats.gamma,
        })
    }

    /// Runs blind timing (BD side), then spread, delay and power estimation
    /// on the training phase, followed by `data` BD symbols of `bits`.
    ///
    /// OFDM symbol layout: one guard symbol, `K1` timing symbols (BD
    /// silent), `K2` symbols with the BD reflecting `+1`, `K2` symbols of
    /// known bit 1, the data, and one trailing symbol.
    fn sync_pass<R: Rng + ?Sized>(
        &self,
        ch: &ChannelSet,
        data: Option<u8>,
        rng: &mut R,
    ) -> Result<(SyncTrial, Vec<ComplexSignal>)> {
        let ofdm = &self.cfg.ofdm;
        let (k1, k2) = (self.cfg.k1, self.cfg.k2);
        let kd = if data.is_some() { self.cfg.bd.k } else { 0 };
        let p = ofdm.symbol_len();
        let pi = p as i64;
        let total = k1 + 2 * k2 + kd;
        let s = self.source.frame(total + 2, -pi, rng)?;
        let c = apply_channel(&s, &ch.h)?;

        let bts_len = (k1 * p + ofdm.nc + ofdm.n) as i64;
        let mut c_rx = ComplexSignal::new(c.window(0..bts_len)?.to_vec(), 0)?;
        if self.bd_sigma2 > 0.0 {
            for v in c_rx.samples_mut() {
                *v += cscg(rng, self.bd_sigma2);
            }
        }
        let dh_hat = estimate_dh_blind(&c_rx, ofdm, k1)?;

        let mut x = vec![1.0; k2 * p];
        x.extend(bd_waveform(
            &vec![1u8; k2],
            &crate::bd::BdConfig {
                k: 1,
                ..self.cfg.bd
            },
            ofdm,
        )?);
        if let Some(bit) = data {
            x.extend(bd_waveform(&[bit], &self.cfg.bd, ofdm)?);
        }
        let wave = Waveform::new(x, (dh_hat + k1 * p) as i64);
        let b = backscatter(&c, &wave, self.cfg.bd.alpha)?;

        let hi = ((total + 1) * p) as i64;
        let mut ys = Vec::with_capacity(ch.antennas());
        for m in 0..ch.antennas() {
            ys.push(self.receive(&s, &b, ch, m, 0, hi, rng)?);
        }
        let tpt = ys[0].shifted((k1 * p) as i64);
        let noise = self.sigma2.max(f64::MIN_POSITIVE);
        let d_hat = estimate_d_min(&tpt, ofdm, k2)?;
        let l_hat = estimate_l(&tpt, ofdm, k2, self.cfg.l_epsilon, noise)?;
        // The CP autocorrelation overshoots D by a few samples on weak
        // first taps, which would pull non-repeating direct-link samples
        // into the window. Ending at Nc - 1 (the bound for D = 0) keeps the
        // window clean whatever D_hat is.
        let d_win = 0;
        let train = ys[0].shifted(((k1 + k2) * p) as i64);
        let est = estimate_sigma_u2(&train, ofdm, l_hat, d_win, k2, 2.0 * noise)?;

        let stats = LinkStats::from_channels(ofdm, &self.cfg.bd, ch, noise)?;
        let geo = ch.geometry;
        Ok((
            SyncTrial {
                dh: geo.dh,
                dh_hat,
                d: geo.d,
                d_hat,
                l: geo.l,
                l_hat,
                sigma_u2: stats.sigma_u2[0],
                sigma_u2_raw: est.raw,
                sigma_u2_hat: est.sigma_u2,
            },
            ys,
        ))
    }

    /// One pass of the synchronisation phases without data.
    pub fn run_sync<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SyncTrial> {
        let (ch, _) = self.channels(rng)?;
        Ok(self.sync_pass(&ch, None, rng)?.0)
    }

    fn run_estimated<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialResult> {
        let ofdm = &self.cfg.ofdm;
        let (k1, k2, k) = (self.cfg.k1, self.cfg.k2, self.cfg.bd.k);
        let (ch, stats) = self.channels(rng)?;
        let sent: u8 = rng.random_range(0..2);
        let (sync, ys) = self.sync_pass(&ch, Some(sent), rng)?;
        let noise = self.detector_noise();
        let sigma_v2 = 2.0 * noise;

        // same conservative window as the power estimate
        let d_win = 0;
        let det = DetectorConfig::new(sync.l_hat.saturating_sub(1), ofdm.nc + d_win - 1, k)?;
        let first = (k1 + 2 * k2) as i64;
        let train_shift = ((k1 + k2) * ofdm.symbol_len()) as i64;
        let mut r = Vec::with_capacity(ys.len());
        let mut gamma_hat = Vec::with_capacity(ys.len());
        for y in &ys {
            let w = bd_symbol_windows(y, ofdm, &det, first)?;
            r.push(test_statistic(&w, det.j_total(), sigma_v2)?);
            let est = estimate_sigma_u2(
                &y.shifted(train_shift),
                ofdm,
                sync.l_hat,
                d_win,
                k2,
                sigma_v2,
            )?;
            gamma_hat.push(est.sigma_u2 / sigma_v2);
        }
        let detected = self.decide(&r, &gamma_hat, det.j_total())?;
        Ok(TrialResult {
            sent,
            detected,
            gamma: stats.gamma,
        })
    }

    /// Conventional energy detector on the first antenna.
    ///
    /// Layout in BD symbols: `T` reflecting and `T` silent training
    /// symbols, a reference symbol in a random state, then the data symbol
    /// whose state differs from the reference iff the bit is 1.
    fn run_benchmark<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialResult> {
        let ofdm = &self.cfg.ofdm;
        let t = self.cfg.training_symbols;
        let len = self.cfg.bd.symbol_len(ofdm);
        let k = self.cfg.bd.k;
        let p = ofdm.symbol_len() as i64;
        let (ch, stats) = self.channels(rng)?;
        let geo = ch.geometry;
        let sent: u8 = rng.random_range(0..2);
        let reference: u8 = rng.random_range(0..2);
        let mut states = vec![1u8; t];
        states.extend(std::iter::repeat_n(0u8, t));
        states.push(reference);
        states.push(reference ^ sent);

        let nsym = states.len();
        let s = self.source.frame(nsym * k + 2, -p, rng)?;
        let c = apply_channel(&s, &ch.h)?;
        let x: Vec<f64> = states
            .iter()
            .flat_map(|&st| std::iter::repeat_n(f64::from(st), len))
            .collect();
        let b = backscatter(&c, &Waveform::new(x, geo.dh as i64), self.cfg.bd.alpha)?;
        let lo = geo.d as i64;
        let hi = lo + (nsym * len) as i64;
        let y = self.receive(&s, &b, &ch, 0, lo, hi, rng)?;

        let mut e = Vec::with_capacity(nsym);
        for i in 0..nsym {
            e.push(symbol_energy(&y, lo + (i * len) as i64, len)?);
        }
        let det = EnergyDetector::train(&e[..t], &e[t..2 * t])?;
        let detected = det.decode(e[2 * t], e[2 * t + 1]);
        Ok(TrialResult {
            sent,
            detected,
            gamma: stats.gamma,
        })
    }
}

/// One trial at mean detection SNR `snr_db`.
pub fn run_trial<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    snr_db: f64,
    rng: &mut R,
) -> Result<(u8, u8)> {
    let r = TrialRunner::for_snr(cfg, snr_db)?.run(rng)?;
    Ok((r.sent, r.detected))
}
