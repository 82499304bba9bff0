use ambc_core::harness::{run_mse_sweep, trial_rng, ExperimentConfig, MseParam, TrialRunner};
use ambc_core::{
    apply_channel, backscatter, bd_waveform, cscg, estimate_l, estimate_sigma_u2, q_metric,
    q_metric_moments, BdConfig, ChannelSet, Cir, ComplexSignal, OfdmConfig, OfdmSource, Waveform,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn noiseless_sync(cfg: &ExperimentConfig, trials: u64) -> Vec<ambc_core::harness::SyncTrial> {
    let runner = TrialRunner::for_snr(cfg, f64::INFINITY).unwrap();
    (0..trials)
        .map(|t| runner.run_sync(&mut trial_rng(1, 0, t)).unwrap())
        .collect()
}

#[test]
fn noiseless_delays_on_single_tap_links() {
    let flat = ExperimentConfig {
        taps_f: 1,
        taps_h: 1,
        ..ExperimentConfig::default()
    };
    for s in noiseless_sync(&flat, 50) {
        assert_eq!((s.dh_hat, s.d_hat, s.l_hat), (16, 16, 17));
        assert_eq!((s.dh, s.d, s.l), (16, 16, 17));
    }
    let zero = ExperimentConfig {
        df: 0,
        dh: 0,
        taps_f: 1,
        taps_h: 1,
        ..ExperimentConfig::default()
    };
    for s in noiseless_sync(&zero, 20) {
        assert_eq!((s.dh_hat, s.d_hat), (0, 0));
    }
}

#[test]
fn noiseless_spread_on_reference_multipath() {
    for s in noiseless_sync(&ExperimentConfig::default(), 50) {
        assert_eq!(s.l, 22);
        assert_eq!(s.l_hat, 22);
    }
}

#[test]
fn pure_noise_q_is_twice_noise_power() {
    let cfg = OfdmConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sigma2 = 0.8;
    let n = 100_000;
    let mut acc = 0.0;
    for t in 0..n {
        let y: Vec<Complex64> = (0..cfg.nc + cfg.n)
            .map(|_| cscg(&mut rng, sigma2))
            .collect();
        let y = ComplexSignal::new(y, 0).unwrap();
        acc += q_metric(&y, t % 40, &cfg, 1).unwrap();
    }
    assert!((acc / n as f64 / (2.0 * sigma2) - 1.0).abs() < 0.01);
}

#[test]
fn q_moments_match_monte_carlo() {
    // l = 0, Lf = 20, Lb = 22, gamma = 1, gamma_d = 10, sigma^2 = 1
    let cfg = OfdmConfig::default();
    let (gamma, gamma_d, sigma2) = (1.0, 10.0, 1.0);
    let alpha = Complex64::new(0.5, 0.0);
    let f = Cir::single(
        Complex64::from_polar((gamma_d * sigma2 / cfg.p).sqrt(), 0.4),
        19,
    );
    let g = (sigma2 * gamma / (2.0 * cfg.p * alpha.norm_sqr())).sqrt();
    let gc = Cir::single(Complex64::from_polar(g, 2.0), 21);
    let src = OfdmSource::new(cfg).unwrap();
    let p = cfg.symbol_len();
    let n = 100_000;
    let mut q = Vec::with_capacity(n);
    for t in 0..n as u64 {
        let mut rng = trial_rng(3, 0, t);
        let s = src.frame(2, -(p as i64), &mut rng).unwrap();
        let b = backscatter(&s, &Waveform::new(vec![1.0; 2 * p], -(p as i64)), alpha).unwrap();
        let mut y = ComplexSignal::zeros(p, 0);
        y.accumulate(&apply_channel(&s, &f).unwrap());
        y.accumulate(&apply_channel(&b, &gc).unwrap());
        for v in y.samples_mut() {
            *v += cscg(&mut rng, sigma2);
        }
        q.push(q_metric(&y, 0, &cfg, 1).unwrap());
    }
    let (mu, var) = q_metric_moments(0, 20, 22, 64, 1, gamma, gamma_d, sigma2).unwrap();
    let m = q.iter().sum::<f64>() / n as f64;
    let v = q.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let m4 = q.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
    let se_v = ((m4 - v * v) / n as f64).sqrt();
    assert!(
        (m - mu).abs() < 3.0 * (var / n as f64).sqrt(),
        "mean {m} vs {mu}"
    );
    assert!((v - var).abs() < 3.0 * se_v, "var {v} vs {var}");
}

#[test]
fn noiseless_power_estimate_matches_reconstruction() {
    let cfg = ExperimentConfig::default();
    let profile = cfg.profile_at(cfg.distance).unwrap();
    let src = OfdmSource::new(cfg.ofdm).unwrap();
    let p = cfg.ofdm.symbol_len();
    let k2 = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let ch = ChannelSet::sample(&cfg.ofdm, &profile, 1, &mut rng).unwrap();
        let geo = ch.geometry;
        let s = src.frame(k2 + 1, -(p as i64), &mut rng).unwrap();
        let c = apply_channel(&s, &ch.h).unwrap();
        let bd = BdConfig { k: 1, ..cfg.bd };
        let x = Waveform::new(
            bd_waveform(&vec![1; k2], &bd, &cfg.ofdm).unwrap(),
            geo.dh as i64,
        );
        let b = backscatter(&c, &x, cfg.bd.alpha).unwrap();
        let y = apply_channel(&s, &ch.f[0])
            .unwrap()
            .add(&apply_channel(&b, &ch.g_cir(0)).unwrap());
        let est = estimate_sigma_u2(&y, &cfg.ofdm, geo.l, geo.d, k2, 0.0).unwrap();

        // mean |2 alpha g (s * h)[n]|^2 over the same window
        let mut acc = 0.0;
        let mut count = 0;
        for k in 0..k2 {
            for w in geo.l - 1..cfg.ofdm.nc + geo.d {
                let n = (k * p + w) as i64 - geo.dg as i64;
                let sh: Complex64 =
                    ch.h.taps()
                        .iter()
                        .enumerate()
                        .map(|(l, t)| t * s.at(n - (ch.h.delay() + l) as i64))
                        .sum();
                acc += (2.0 * cfg.bd.alpha * ch.g[0] * sh).norm_sqr();
                count += 1;
            }
        }
        let want = acc / count as f64;
        assert!(
            (est.raw - want).abs() <= 1e-12 * want,
            "{} vs {want}",
            est.raw
        );
        assert_eq!(est.raw, est.sigma_u2);
    }
}

#[test]
fn power_estimate_bias_at_20_db() {
    let cfg = ExperimentConfig {
        k2: 2,
        ..ExperimentConfig::default()
    };
    let runner = TrialRunner::for_snr(&cfg, 20.0).unwrap();
    let (mut est, mut truth) = (0.0, 0.0);
    for t in 0..10_000 {
        let s = runner.run_sync(&mut trial_rng(8, 0, t)).unwrap();
        est += s.sigma_u2_hat;
        truth += s.sigma_u2;
    }
    assert!((est / truth - 1.0).abs() < 0.05, "{}", est / truth);
}

#[test]
fn spread_estimate_is_first_noise_floor_sample() {
    let cfg = OfdmConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = OfdmSource::new(cfg).unwrap().frame(2, 0, &mut rng).unwrap();
    let h = Cir::new(vec![Complex64::new(1.0, 0.0); 7], 15).unwrap();
    let y = apply_channel(&s, &h)
        .unwrap()
        .add(&ComplexSignal::zeros(1, 0));
    // spread 22: Q vanishes from l = 21 on
    assert_eq!(estimate_l(&y, &cfg, 1, 1.5, 1e-9).unwrap(), 22);
}

#[test]
fn blind_timing_accuracy_with_two_symbols() {
    let cfg = ExperimentConfig {
        k1: 2,
        snr_grid: vec![10.0],
        trials: 10_000,
        seed: 2,
        ..ExperimentConfig::default()
    };
    let v = run_mse_sweep(&cfg, MseParam::Dh).unwrap().rows[0].value;
    assert!((v / 0.01 - 1.0).abs() <= 0.5, "{v}");
}

#[test]
fn blind_timing_error_floors_at_high_snr() {
    let cfg = ExperimentConfig {
        snr_grid: vec![15.0, 30.0],
        trials: 5_000,
        seed: 2,
        ..ExperimentConfig::default()
    };
    let r = run_mse_sweep(&cfg, MseParam::Dh).unwrap();
    let (a, b) = (r.rows[0].value, r.rows[1].value);
    assert!((a / b - 1.0).abs() < 0.15, "{a} vs {b}");
}
