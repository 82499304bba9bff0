//! Rayleigh multipath channels with exponential power-delay profile.
//!
//! All delays and spreads are in samples. A channel's total spread is its
//! propagation delay plus its tap count, so a `taps`-tap response with delay
//! `d` has its last nonzero tap at `d + taps - 1`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::{cscg, ComplexSignal, OfdmConfig};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Discrete channel impulse response with integer propagation delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    taps: Vec<Complex64>,
    delay: usize,
}

impl Cir {
    pub fn new(taps: Vec<Complex64>, delay: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Config("channel needs at least one tap".into()));
        }
        Ok(Self { taps, delay })
    }

    /// Single-tap channel `gain * delta[n - delay]`.
    pub fn single(gain: Complex64, delay: usize) -> Self {
        Self {
            taps: vec![gain],
            delay,
        }
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Total spread: delay plus tap count.
    pub fn spread(&self) -> usize {
        self.delay + self.taps.len()
    }

    /// `sum |tap|^2`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    pub fn profile(&self) -> PathProfile {
        PathProfile {
            delay: self.delay,
            taps: self.taps.len(),
        }
    }
}

/// Samples a Rayleigh CIR whose tap variances follow `exp(-l / decay)` and
/// sum to `mean_gain`.
pub fn sample_rayleigh_cir<R: Rng + ?Sized>(
    num_taps: usize,
    decay: f64,
    mean_gain: f64,
    delay: usize,
    rng: &mut R,
) -> Result<Cir> {
    let weights = pdp_weights(num_taps, decay, mean_gain)?;
    let taps = weights.iter().map(|&w| cscg(rng, w)).collect();
    Ok(Cir { taps, delay })
}

/// Per-tap variances of the exponential power-delay profile.
pub fn pdp_weights(num_taps: usize, decay: f64, mean_gain: f64) -> Result<Vec<f64>> {
    if num_taps == 0 {
        return Err(Error::Config("num_taps must be positive".into()));
    }
    if !(decay > 0.0) || !(mean_gain > 0.0) {
        return Err(Error::Config("decay and mean_gain must be positive".into()));
    }
    let raw: Vec<f64> = (0..num_taps).map(|l| (-(l as f64) / decay).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w * mean_gain / total).collect())
}

/// Free-space power gain `c^2 / (4 pi d^2 fc^2)`.
pub fn pathloss_gain(distance_m: f64, fc_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !(fc_hz > 0.0) {
        return Err(Error::Domain(format!(
            "distance ({distance_m}) and carrier ({fc_hz}) must be positive"
        )));
    }
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    Ok(c2 / (4.0 * std::f64::consts::PI * distance_m * distance_m * fc_hz * fc_hz))
}

/// Propagation delay in samples, `floor(d fs / c)`.
pub fn propagation_delay_samples(distance_m: f64, fs: f64) -> usize {
    (distance_m * fs / SPEED_OF_LIGHT).floor().max(0.0) as usize
}

/// Full linear convolution with the CIR, shifted by its delay.
///
/// `out[n] = sum_l taps[l] * sig[n - delay - l]`; the output covers every
/// index where that sum can be nonzero.
pub fn apply_channel(sig: &ComplexSignal, cir: &Cir) -> Result<ComplexSignal> {
    if sig.is_empty() {
        return Err(Error::Range("cannot filter an empty signal".into()));
    }
    let x = sig.samples();
    let taps = cir.taps();
    let mut out = vec![Complex64::default(); x.len() + taps.len() - 1];
    for (l, &t) in taps.iter().enumerate() {
        for (o, &s) in out[l..].iter_mut().zip(x) {
            *o += t * s;
        }
    }
    Ok(ComplexSignal::from_parts(
        out,
        sig.start() + cir.delay() as i64,
    ))
}

/// Delay and tap count of one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathProfile {
    pub delay: usize,
    pub taps: usize,
}

impl PathProfile {
    pub fn new(delay: usize, taps: usize) -> Self {
        Self { delay, taps }
    }

    pub fn spread(&self) -> usize {
        self.delay + self.taps
    }
}

/// Delays, spreads and the repeating length of the deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    pub df: usize,
    pub dh: usize,
    pub dg: usize,
    pub db: usize,
    pub lf: usize,
    pub lh: usize,
    pub lg: usize,
    pub lb: usize,
    /// `min(Df, Db)`
    pub d: usize,
    /// `max(Lf, Lb)`
    pub l: usize,
    /// Repeating length `Nc + D - L + 1`.
    pub j: usize,
}

impl ChannelGeometry {
    /// First index (relative to an OFDM symbol start) of the repeating window.
    pub fn window_start(&self) -> usize {
        self.l - 1
    }

    /// Last index (inclusive) of the repeating window for CP length `nc`.
    pub fn window_end(&self, nc: usize) -> usize {
        nc + self.d - 1
    }
}

/// Derives the detection geometry from the three link profiles.
///
/// The backscatter cascade `h * g` has delay `Dh + Dg` and
/// `taps_h + taps_g - 1` taps.
pub fn derive_geometry(
    cfg: &OfdmConfig,
    f: PathProfile,
    h: PathProfile,
    g: PathProfile,
) -> Result<ChannelGeometry> {
    if f.taps == 0 || h.taps == 0 || g.taps == 0 {
        return Err(Error::Config("every link needs at least one tap".into()));
    }
    let db = h.delay + g.delay;
    let lb = db + h.taps + g.taps - 1;
    let d = f.delay.min(db);
    let l = f.spread().max(lb);
    let j = (cfg.nc + d + 1) as i64 - l as i64;
    if j < 1 {
        return Err(Error::Geometry(format!(
            "channel spread L - D = {} exceeds CP length {}",
            l - d,
            cfg.nc
        )));
    }
    Ok(ChannelGeometry {
        df: f.delay,
        dh: h.delay,
        dg: g.delay,
        db,
        lf: f.spread(),
        lh: h.spread(),
        lg: g.spread(),
        lb,
        d,
        l,
        j: j as usize,
    })
}

/// Mean link gains and tap layout used to draw a [`ChannelSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub f: PathProfile,
    pub h: PathProfile,
    /// BD to receiver delay in samples; the link itself is a single tap.
    pub dg: usize,
    /// Exponential PDP decay constant, in taps.
    pub decay: f64,
    /// `E[sum |f[l]|^2]`
    pub gain_f: f64,
    /// `E[sum |h[l]|^2]`
    pub gain_h: f64,
    /// `E[|g_m|^2]`
    pub gain_g: f64,
}

/// One independent draw of every link for an `M`-antenna receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h: Cir,
    pub f: Vec<Cir>,
    pub g: Vec<Complex64>,
    pub geometry: ChannelGeometry,
}

impl ChannelSet {
    pub fn sample<R: Rng + ?Sized>(
        cfg: &OfdmConfig,
        profile: &ChannelProfile,
        antennas: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::Config(
                "at least one receive antenna required".into(),
            ));
        }
        let geometry = derive_geometry(cfg, profile.f, profile.h, PathProfile::new(profile.dg, 1))?;
        let h = sample_rayleigh_cir(
            profile.h.taps,
            profile.decay,
            profile.gain_h,
            profile.h.delay,
            rng,
        )?;
        let mut f = Vec::with_capacity(antennas);
        let mut g = Vec::with_capacity(antennas);
        for _ in 0..antennas {
            f.push(sample_rayleigh_cir(
                profile.f.taps,
                profile.decay,
                profile.gain_f,
                profile.f.delay,
                rng,
            )?);
            g.push(cscg(rng, profile.gain_g));
        }
        Ok(Self { h, f, g, geometry })
    }

    pub fn antennas(&self) -> usize {
        self.g.len()
    }

    /// BD to receiver link of antenna `m` as a CIR.
    pub fn g_cir(&self, m: usize) -> Cir {
        Cir::single(self.g[m], self.geometry.dg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_tap_mean_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| {
                sample_rayleigh_cir(1, 1.0, 2.0, 0, &mut rng)
                    .unwrap()
                    .energy()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() / 2.0 < 0.02, "mean {mean}");
    }

    #[test]
    fn pdp_ratios_and_normalisation() {
        let w = pdp_weights(4, 1.0, 1.0).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for l in 1..4 {
            assert!((w[l] / w[0] - (-(l as f64)).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn empirical_pdp_matches_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut acc = [0.0; 4];
        for _ in 0..n {
            let cir = sample_rayleigh_cir(4, 1.0, 1.0, 3, &mut rng).unwrap();
            for (a, t) in acc.iter_mut().zip(cir.taps()) {
                *a += t.norm_sqr();
            }
        }
        let w = pdp_weights(4, 1.0, 1.0).unwrap();
        for (a, w) in acc.iter().zip(&w) {
            assert!((a / n as f64 - w).abs() / w < 0.02);
        }
    }

    #[test]
    fn zero_taps_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_rayleigh_cir(0, 1.0, 1.0, 0, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn pathloss_values() {
        // direct arithmetic: 9e16 / (4 pi 0.25 8.1e17)
        let expected = 9e16 / (4.0 * std::f64::consts::PI * 0.25 * 8.1e17);
        let g = pathloss_gain(0.5, 900e6).unwrap();
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 3.537e-2).abs() < 1e-4);
        let g2 = pathloss_gain(1.0, 900e6).unwrap();
        assert!((g / g2 - 4.0).abs() < 1e-12);
        assert!(matches!(pathloss_gain(0.0, 900e6), Err(Error::Domain(_))));
        assert!(pathloss_gain(1.0, -1.0).is_err());
    }

    #[test]
    fn identity_and_scaled_shift() {
        let sig = ComplexSignal::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)], 5).unwrap();
        let out = apply_channel(&sig, &Cir::single(c(1.0, 0.0), 0)).unwrap();
        assert_eq!(out, sig);
        let a = c(0.3, -0.7);
        let out = apply_channel(&sig, &Cir::single(a, 4)).unwrap();
        assert_eq!(out.start(), 9);
        for (o, s) in out.samples().iter().zip(sig.samples()) {
            assert_eq!(*o, a * s);
        }
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<Complex64> = (0..16).map(|_| cscg(&mut rng, 1.0)).collect();
        let sig = ComplexSignal::new(x.clone(), -3).unwrap();
        let cir = Cir::new(vec![c(0.5, 0.1), c(-0.2, 0.9)], 2).unwrap();
        let out = apply_channel(&sig, &cir).unwrap();
        // O(n L) reference on the global timeline
        for n in -10i64..30 {
            let mut want = Complex64::default();
            for (l, t) in cir.taps().iter().enumerate() {
                let idx = n - 2 - l as i64 + 3;
                if (0..16).contains(&idx) {
                    want += t * x[idx as usize];
                }
            }
            assert!((out.at(n) - want).norm() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn reference_geometry() {
        let cfg = OfdmConfig::default();
        let g = derive_geometry(
            &cfg,
            PathProfile::new(16, 4),
            PathProfile::new(16, 6),
            PathProfile::new(0, 1),
        )
        .unwrap();
        assert_eq!((g.d, g.l, g.j), (16, 22, 59));
        assert_eq!((g.lf, g.lh, g.lb, g.db), (20, 22, 22, 16));
    }

    #[test]
    fn zero_delay_single_taps_give_full_cp() {
        let cfg = OfdmConfig::default();
        let one = PathProfile::new(0, 1);
        let g = derive_geometry(&cfg, one, one, one).unwrap();
        assert_eq!(g.j, cfg.nc);
    }

    #[test]
    fn spread_beyond_cp_is_geometry_error() {
        let cfg = OfdmConfig::default();
        let r = derive_geometry(
            &cfg,
            PathProfile::new(0, 70),
            PathProfile::new(0, 1),
            PathProfile::new(0, 1),
        );
        assert!(matches!(r, Err(Error::Geometry(_))));
    }
}
