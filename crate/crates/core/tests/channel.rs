mod common;

use std::f64::consts::PI;

use common::{gaussian, gray_point, mean, random_dibits, rng};
use proptest::prelude::*;
use qpsk_link::channel::{
    apply_awgn, apply_cfo, apply_multipath, apply_timing, run_channel, ChannelConfig, NoiseLevel,
};
use qpsk_link::tx::{transmit_dibits, TxConfig};
use qpsk_link::ComplexSample;

fn qpsk(n: usize, seed: u64) -> Vec<ComplexSample> {
    random_dibits(n, seed).into_iter().map(gray_point).collect()
}

fn power(x: &[ComplexSample]) -> f64 {
    mean(x.iter().map(|v| v.norm_sqr()))
}

#[test]
fn awgn_hits_requested_snr_with_circular_noise() {
    let sps = 4;
    let x = transmit_dibits(&random_dibits(250_000, 3), &TxConfig::default()).unwrap();
    assert!(x.len() >= 1_000_000);
    for ebn0 in [0.0, 6.0, 12.0] {
        let y = apply_awgn(&x, NoiseLevel::EbN0Db(ebn0), 2, sps, 9).unwrap();
        let n: Vec<_> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        // Per-sample SNR sits 10·log10(sps) below Es/N0 for a unit-energy pulse.
        let measured = 10.0 * (power(&x) / power(&n)).log10() + 10.0 * (sps as f64).log10();
        let requested = ebn0 + 10.0 * 2f64.log10();
        assert!((measured - requested).abs() < 0.1, "{measured} vs {requested}");

        let vr = mean(n.iter().map(|v| v.re * v.re));
        let vi = mean(n.iter().map(|v| v.im * v.im));
        assert!((vr / vi - 1.0).abs() < 0.02, "{vr} {vi}");
        let corr = mean(n.iter().map(|v| v.re * v.im)) / (vr * vi).sqrt();
        assert!(corr.abs() < 0.01, "{corr}");
    }
}

#[test]
fn awgn_rejects_silence_and_is_deterministic() {
    let zeros = vec![ComplexSample::default(); 100];
    assert!(apply_awgn(&zeros, NoiseLevel::EbN0Db(5.0), 2, 4, 1).is_err());
    let x = qpsk(1000, 1);
    assert_eq!(apply_awgn(&x, NoiseLevel::Noiseless, 2, 4, 1).unwrap(), x);
    let a = apply_awgn(&x, NoiseLevel::EbN0Db(5.0), 2, 4, 7).unwrap();
    assert_eq!(a, apply_awgn(&x, NoiseLevel::EbN0Db(5.0), 2, 4, 7).unwrap());
    assert_ne!(a, apply_awgn(&x, NoiseLevel::EbN0Db(5.0), 2, 4, 8).unwrap());
}

#[test]
fn multipath_scales_energy_by_tap_energy() {
    let mut r = rng(5);
    let x: Vec<_> = (0..200_000).map(|_| gaussian(&mut r, 1.0)).collect();
    for taps in [
        vec![ComplexSample::new(1.0, 0.0), ComplexSample::from_polar(0.2, PI / 6.0)],
        vec![ComplexSample::new(0.8, 0.1), ComplexSample::new(0.0, 0.0), ComplexSample::new(-0.3, 0.4)],
    ] {
        let tap_energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        let ratio = power(&apply_multipath(&x, &taps)) / power(&x);
        assert!((ratio / tap_energy - 1.0).abs() < 0.01, "{ratio} vs {tap_energy}");
    }
}

#[test]
fn two_ray_channel_distorts_beyond_fifteen_percent() {
    let x = qpsk(100_000, 11);
    let y = apply_multipath(&x, &[ComplexSample::new(1.0, 0.0), ComplexSample::from_polar(0.2, PI / 6.0)]);
    let err = mean(y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()));
    let evm = 100.0 * (err / power(&x)).sqrt();
    assert!(evm > 15.0, "{evm}");
    assert!((evm - 20.0).abs() < 0.5, "{evm}");
}

#[test]
fn cfo_preserves_magnitude_and_handles_half_turn() {
    let x = qpsk(5000, 2);
    let y = apply_cfo(&x, 0.0123, 0.4);
    for (a, b) in x.iter().zip(&y) {
        assert!((a.norm() - b.norm()).abs() < 1e-12);
    }
    let neg = apply_cfo(&x, 0.0, PI);
    for (a, b) in x.iter().zip(&neg) {
        assert!((a + b).norm() < 1e-12);
    }
    assert_eq!(apply_cfo(&x, 0.0, 0.0), x);
}

#[test]
fn clock_skew_changes_length_by_ppm() {
    let x = vec![ComplexSample::new(1.0, 0.0); 1_000_000];
    for ppm in [-100.0, 100.0] {
        let n = apply_timing(&x, 0.0, ppm).len() as f64;
        let want = 1e6 * (1.0 + ppm * 1e-6);
        assert!((n - want).abs() <= 1.0, "ppm={ppm}: {n}");
    }
}

#[test]
fn half_sample_delay_on_a_sinusoid() {
    let f = 0.05;
    let x: Vec<_> = (0..400).map(|k| ComplexSample::from_polar(1.0, 2.0 * PI * f * k as f64)).collect();
    let y = apply_timing(&x, 0.5, 0.0);
    for (k, v) in y.iter().enumerate().take(390).skip(4) {
        let want = ComplexSample::from_polar(1.0, 2.0 * PI * f * (k as f64 - 0.5));
        assert!((v - want).norm() < 1e-3, "k={k}");
    }
    let same = apply_timing(&x, 0.0, 0.0);
    assert!(same.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-6));
}

#[test]
fn identity_configuration_passes_through() {
    let x = qpsk(2000, 4);
    assert_eq!(run_channel(&x, &ChannelConfig::ideal(), 4).unwrap(), x);
}

#[test]
fn invalid_configurations_name_their_field() {
    let bad = [
        (ChannelConfig { taps: vec![], ..ChannelConfig::ideal() }, "channel.taps"),
        (ChannelConfig { clock_ppm: 1500.0, ..ChannelConfig::ideal() }, "channel.clock_ppm"),
        (ChannelConfig { timing_frac: 1.0, ..ChannelConfig::ideal() }, "channel.timing_frac"),
    ];
    for (cfg, field) in bad {
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains(field), "{msg}");
    }
}

fn channel_strategy() -> impl Strategy<Value = ChannelConfig> {
    (
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
        -0.01f64..0.01,
        -PI..PI,
        0.0f64..0.999,
        -1000.0f64..1000.0,
        prop::option::of(-5.0f64..40.0),
        any::<u64>(),
    )
        .prop_filter_map("at least one nonzero tap", |(taps, cfo, phase0, tf, ppm, db, seed)| {
            let taps: Vec<_> = taps.into_iter().map(|(r, i)| ComplexSample::new(r, i)).collect();
            taps.iter().any(|t| t.norm() > 1e-3).then(|| ChannelConfig {
                taps,
                cfo,
                phase0,
                timing_frac: tf,
                clock_ppm: ppm,
                snr_eb_n0_db: db.map_or(NoiseLevel::Noiseless, NoiseLevel::EbN0Db),
                seed,
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channel_output_is_finite_and_reproducible(cfg in channel_strategy(), seed in 0u64..1000) {
        let x = qpsk(600, seed);
        let a = run_channel(&x, &cfg, 4).unwrap();
        prop_assert!(a.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        prop_assert_eq!(&a, &run_channel(&x, &cfg, 4).unwrap());
    }
}
