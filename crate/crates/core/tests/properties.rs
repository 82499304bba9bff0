use ambc_core::analysis::{multi_antenna_f, single_antenna_f};
use ambc_core::harness::{trial_rng, ExperimentConfig, TrialRunner};
use ambc_core::{
    apply_channel, bd_waveform, combine_statistics, cp_window_equal, min_ber_single,
    multiantenna_threshold, optimal_threshold, q_metric_moments, BdConfig, Cir, CombinerWeights,
    ComplexSignal, OfdmConfig, OfdmSource,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn signal(values: &[(f64, f64)], start: i64) -> ComplexSignal {
    ComplexSignal::new(
        values.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
        start,
    )
    .unwrap()
}

fn taps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclic_prefix_repeats(seed in any::<u64>(), symbols in 1usize..4, nc_pow in 2u32..6) {
        let nc = 1usize << nc_pow;
        let cfg = OfdmConfig::new(128, nc, 1e6, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = OfdmSource::new(cfg).unwrap().frame(symbols, 0, &mut rng).unwrap();
        prop_assert_eq!(s.len(), symbols * (128 + nc));
        for k in 0..symbols {
            let base = k * (128 + nc);
            for j in 0..nc {
                prop_assert_eq!(s.samples()[base + j], s.samples()[base + j + 128]);
            }
        }
        for k in 0..symbols {
            prop_assert!(cp_window_equal(&s, &cfg, k, 0..nc).unwrap());
        }
    }

    #[test]
    fn convolution_is_linear(
        x in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4..40),
        y in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4..40),
        h in taps(),
        delay in 0usize..8,
        a in -3.0..3.0f64,
    ) {
        let h = Cir::new(h.iter().map(|&(r, i)| Complex64::new(r, i)).collect(), delay).unwrap();
        let sx = signal(&x, 0);
        let sy = signal(&y, 3);
        let scale = Complex64::new(a, 0.5);
        let lhs = apply_channel(&sx.scaled(scale).add(&sy), &h).unwrap();
        let rhs = apply_channel(&sx, &h).unwrap().scaled(scale).add(&apply_channel(&sy, &h).unwrap());
        prop_assert_eq!(lhs.start(), rhs.start());
        prop_assert_eq!(lhs.len(), rhs.len());
        for (p, q) in lhs.samples().iter().zip(rhs.samples()) {
            prop_assert!((p - q).norm() < 1e-9);
        }
    }

    #[test]
    fn convolution_matches_direct_sum(x in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..64), h in taps(), delay in 0usize..5) {
        let hc: Vec<Complex64> = h.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let cir = Cir::new(hc.clone(), delay).unwrap();
        let sx = signal(&x, 2);
        let out = apply_channel(&sx, &cir).unwrap();
        for n in out.start()..out.end() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, t) in hc.iter().enumerate() {
                acc += t * sx.get(n - (delay + l) as i64).unwrap_or_default();
            }
            prop_assert!((out.at(n) - acc).norm() < 1e-9);
        }
    }

    #[test]
    fn waveform_sign_structure(bits in prop::collection::vec(0u8..2, 1..6), k in 1usize..4) {
        let cfg = OfdmConfig::new(64, 16, 1e6, 1.0).unwrap();
        let bd = BdConfig { k, ..BdConfig::default() };
        let w = bd_waveform(&bits, &bd, &cfg).unwrap();
        let p = cfg.symbol_len();
        prop_assert_eq!(w.len(), bits.len() * k * p);
        for (i, chunk) in w.chunks(p).enumerate() {
            let bit = bits[i / k];
            for (n, &v) in chunk.iter().enumerate() {
                let want = if bit == 1 && n >= p / 2 { -1.0 } else { 1.0 };
                prop_assert_eq!(v, want);
            }
        }
    }

    #[test]
    fn threshold_between_means(gamma in 1e-3..1e4f64, j in 1usize..5000) {
        let e = optimal_threshold(gamma, j);
        prop_assert!(e > 1.0);
        prop_assert!(e < 1.0 + gamma);
        prop_assert!(optimal_threshold(gamma, j + 1) <= e);
    }

    #[test]
    fn single_antenna_identity(gamma in 1e-3..1e4f64, j in 1usize..5000) {
        let (f1, f2) = single_antenna_f(gamma, j);
        prop_assert!((f1 * f1 - f2 * f2 - 2.0 * gamma.ln_1p()).abs() < 1e-9 * (1.0 + f1 * f1));
    }

    #[test]
    fn multi_antenna_identity(
        gamma in prop::collection::vec(1e-2..1e3f64, 2..5),
        raw in prop::collection::vec(0.05..1.0f64, 5),
        j in 5usize..2000,
    ) {
        let w = CombinerWeights::normalized(raw[..gamma.len()].to_vec()).unwrap();
        let (f1, f2) = multi_antenna_f(&w, &gamma, j).unwrap();
        let c: f64 = w.as_slice().iter().zip(&gamma).map(|(t, g)| t * t * g * (g + 2.0)).sum::<f64>();
        prop_assert!((f1 * f1 - f2 * f2 - c.ln_1p()).abs() < 1e-9 * (1.0 + f1 * f1));
        let th = multiantenna_threshold(&w, &gamma, j).unwrap();
        let m0: f64 = w.as_slice().iter().sum();
        let m1: f64 = w.as_slice().iter().zip(&gamma).map(|(t, g)| t * (1.0 + g)).sum();
        prop_assert!(th > m0 && th < m1);
    }

    #[test]
    fn single_weight_reduces_exactly(gamma in 1e-3..1e4f64, j in 1usize..5000) {
        let a = multiantenna_threshold(&CombinerWeights::single(), &[gamma], j).unwrap();
        prop_assert!((a - optimal_threshold(gamma, j)).abs() < 1e-9);
        prop_assert_eq!(combine_statistics(&[gamma], &CombinerWeights::single()).unwrap(), gamma);
    }

    #[test]
    fn min_ber_monotone_in_j(gamma in 1e-2..1e3f64, j in 10usize..200) {
        prop_assert!(min_ber_single(gamma, j + 1).p_e <= min_ber_single(gamma, j).p_e);
    }

    #[test]
    fn q_moments_noise_floor(extra in 0usize..40, lf in 1usize..20, lb in 1usize..20, k2 in 1usize..4) {
        // at and beyond L - 1 only noise remains
        let l = lf.max(lb) - 1 + extra;
        let (m, v) = q_metric_moments(l, lf, lb, 64, k2, 3.0, 40.0, 0.7).unwrap();
        prop_assert!((m - 1.4).abs() < 1e-12);
        prop_assert!((v - 1.96 / (k2 * (64 - l)) as f64).abs() < 1e-12);
    }
}

#[test]
fn trials_replay_under_fixed_seed() {
    let cfg = ExperimentConfig {
        antennas: 2,
        ..ExperimentConfig::default()
    };
    let runner = TrialRunner::for_snr(&cfg, 8.0).unwrap();
    for t in 0..20 {
        let a = runner.run(&mut trial_rng(4, 1, t)).unwrap();
        let b = runner.run(&mut trial_rng(4, 1, t)).unwrap();
        assert_eq!(a, b);
    }
    let a = runner.run(&mut trial_rng(4, 1, 0)).unwrap();
    let b = runner.run(&mut trial_rng(4, 1, 1)).unwrap();
    assert_ne!(a.gamma, b.gamma);
}
