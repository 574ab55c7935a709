mod common;

use std::f64::consts::PI;

use common::{circular_mean, gaussian, gray_point, gray_slice, mean, q_oracle, random_dibits, rng};
use proptest::prelude::*;
use qpsk_link::analysis::{compute_error_rates, find_stream_alignment};
use qpsk_link::channel::{
    apply_awgn, apply_multipath, apply_timing, rotate_quarter_turns, run_channel, ChannelConfig,
    NoiseLevel,
};
use qpsk_link::constellation::Constellation;
use qpsk_link::rx::{
    costas_error, decide, run_rx, Cma, CmaParams, ClockSync, RxConfig, RxOutput,
    WEIGHT_ENERGY_BAND,
};
use qpsk_link::tx::{transmit_dibits, TxConfig};
use qpsk_link::ComplexSample;

fn plain_tx() -> TxConfig {
    TxConfig { differential: false, ..TxConfig::default() }
}

fn link(data: &[u8], ch: &ChannelConfig, rx: &RxConfig) -> RxOutput {
    let tx = TxConfig { differential: rx.differential, ..TxConfig::default() };
    let s = transmit_dibits(data, &tx).unwrap();
    run_rx(&run_channel(&s, ch, tx.sps).unwrap(), rx).unwrap()
}

/// SER over the final `tail` recovered dibits at the best lag and any of
/// the four carrier rotations.
fn tail_ser(out: &RxOutput, data: &[u8], tail: usize) -> f64 {
    let m = Constellation::default();
    (0..4u8)
        .filter_map(|r| {
            let derot: Vec<u8> = out
                .dibits
                .iter()
                .map(|&d| m.dibit_at_phase((m.phase_index(d) + r) % 4))
                .collect();
            let sp = find_stream_alignment(&derot, data, 256, 12)?;
            let lag = sp.index - sp.rotation;
            let end = derot.len().min(data.len() + lag);
            let start = end - tail;
            Some(compute_error_rates(&derot[..end], data, start, start - lag).unwrap().ser)
        })
        .fold(1.0, f64::min)
}

fn bank_angle(k: f64, nfilts: usize) -> f64 {
    2.0 * PI * k / nfilts as f64
}

#[test]
fn clock_settles_on_zero_offset_bank_without_delay() {
    let data = random_dibits(20_000, 1);
    let tx = plain_tx();
    let s = transmit_dibits(&data, &tx).unwrap();
    let rx = RxConfig::matching(&tx);
    let mut clock = ClockSync::new(&rx.clock_params()).unwrap();
    let mut trace = Vec::new();
    clock.process(&s, Some(&mut trace));
    let tail = &trace[trace.len() / 2..];
    let k = circular_mean(tail.iter().map(|c| bank_angle(c.filt_index, 32))) * 32.0 / (2.0 * PI);
    assert!(k.abs() < 1.0, "k={k}");
    let e = mean(tail.iter().map(|c| c.error));
    assert!(e.abs() < 0.01, "{e}");
    assert!(clock.lock_status().locked);
}

#[test]
fn fractional_delay_moves_the_bank_proportionally() {
    let data = random_dibits(20_000, 2);
    let tx = plain_tx();
    let s = transmit_dibits(&data, &tx).unwrap();
    let rx = RxConfig::matching(&tx);
    let settle = |x: &[ComplexSample]| {
        let mut clock = ClockSync::new(&rx.clock_params()).unwrap();
        let mut trace = Vec::new();
        clock.process(x, Some(&mut trace));
        let tail = &trace[trace.len() / 2..];
        circular_mean(tail.iter().map(|c| bank_angle(c.filt_index, 32)))
    };
    let base = settle(&s);
    // A later arrival is taken by a bank further along by delay·nfilts.
    let moved = settle(&apply_timing(&s, 0.3, 0.0));
    let shift = (moved - base).rem_euclid(2.0 * PI) * 32.0 / (2.0 * PI);
    assert!((shift - 0.3 * 32.0).abs() < 1.0, "shift={shift}");
}

#[test]
fn clock_skew_is_tracked_in_rate() {
    let data = random_dibits(40_000, 3);
    let rx = RxConfig::matching(&plain_tx());
    let ch = ChannelConfig { clock_ppm: 50.0, ..ChannelConfig::ideal() };
    let out = link(&data, &ch, &rx);
    let c = &out.trajectories.clock;
    let rate = mean(c[c.len() * 3 / 4..].iter().map(|s| s.rate));
    assert!((rate - 4.0 * (1.0 + 50e-6)).abs() < 1e-5, "{rate}");
    assert!(out.report.clock.locked);
}

#[test]
fn timing_offsets_recover_error_free() {
    let data = random_dibits(30_000, 4);
    let rx = RxConfig::matching(&plain_tx());
    for i in 0..10 {
        let ch = ChannelConfig { timing_frac: i as f64 / 10.0, ..ChannelConfig::ideal() };
        let out = link(&data, &ch, &rx);
        assert_eq!(tail_ser(&out, &data, 10_000), 0.0, "timing_frac={}", i as f64 / 10.0);
    }
}

#[test]
fn noise_alone_does_not_lock() {
    let mut r = rng(6);
    let x: Vec<_> = (0..200_000).map(|_| gaussian(&mut r, 0.5)).collect();
    let out = run_rx(&x, &RxConfig::default()).unwrap();
    assert!(!out.report.clock.locked);
    assert!(!out.report.costas.locked);
}

#[test]
fn cma_cost_does_not_grow_on_a_static_channel() {
    let sym: Vec<_> = random_dibits(60_000, 7).into_iter().map(gray_point).collect();
    let y = apply_multipath(&sym, &[ComplexSample::new(1.0, 0.0), ComplexSample::from_polar(0.2, PI / 6.0)]);
    let mut cma = Cma::new(&CmaParams { len: 11, step_mu: 1e-3, modulus_r: 1.0 });
    let z = cma.process(&y);
    let windows: Vec<f64> = z
        .chunks_exact(5_000)
        .map(|w| mean(w.iter().map(|v| (v.norm_sqr() - 1.0).powi(2))))
        .collect();
    for pair in windows.windows(2) {
        assert!(pair[1] <= pair[0] * 1.05 + 1e-4, "{windows:?}");
    }
    assert!(windows[windows.len() - 1] < windows[0] / 10.0, "{windows:?}");
    let m = mean(z[z.len() / 2..].iter().map(|v| v.norm_sqr()));
    assert!((m - 1.0).abs() < 0.05, "{m}");
    assert_eq!(cma.resets(), 0);
}

#[test]
fn cma_leaves_a_clean_stream_alone() {
    let sym: Vec<_> = random_dibits(2_000, 8).into_iter().map(gray_point).collect();
    let mut cma = Cma::new(&CmaParams { len: 11, step_mu: 1e-3, modulus_r: 1.0 });
    let z = cma.process(&sym);
    let d = cma.delay();
    for (a, b) in z[d..].iter().zip(&sym) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn equalizer_lowers_evm_on_two_ray_channel() {
    let data = random_dibits(60_000, 9);
    let ch = ChannelConfig {
        taps: vec![ComplexSample::new(1.0, 0.0), ComplexSample::from_polar(0.2, PI / 6.0)],
        snr_eb_n0_db: NoiseLevel::EbN0Db(20.0),
        seed: 3,
        ..ChannelConfig::ideal()
    };
    let evm = |cma: bool| {
        let mut rx = RxConfig::matching(&plain_tx());
        rx.loops.cma_enabled = cma;
        let out = link(&data, &ch, &rx);
        let tail = &out.symbols[out.symbols.len() * 3 / 4..];
        let err = mean(tail.iter().map(|v| (v - gray_point(gray_slice(*v))).norm_sqr()));
        100.0 * err.sqrt()
    };
    let (with, without) = (evm(true), evm(false));
    assert!(with < 10.0 && with < without, "with={with} without={without}");
}

#[test]
fn carrier_phase_offset_is_removed() {
    let data = random_dibits(20_000, 10);
    let ch = ChannelConfig { phase0: PI / 8.0, ..ChannelConfig::ideal() };
    let out = link(&data, &ch, &RxConfig::matching(&plain_tx()));
    let tail = &out.symbols[out.symbols.len() / 2..];
    let residual = circular_mean(tail.iter().map(|v| (v * gray_point(gray_slice(*v)).conj()).arg()));
    assert!(residual.abs().to_degrees() < 2.0, "{}", residual.to_degrees());
}

#[test]
fn carrier_frequency_offset_is_estimated() {
    let data = random_dibits(40_000, 11);
    let ch = ChannelConfig { cfo: 1e-4, ..ChannelConfig::ideal() };
    let out = link(&data, &ch, &RxConfig::matching(&plain_tx()));
    let c = &out.trajectories.carrier;
    let f = mean(c[c.len() / 2..].iter().map(|p| p.1));
    let truth = 2.0 * PI * 1e-4 * 4.0;
    assert!((f / truth - 1.0).abs() < 0.05, "{f} vs {truth}");
    assert!(out.report.costas.locked);
}

#[test]
fn quarter_turn_gives_constant_decision_rotation() {
    let data = random_dibits(20_000, 12);
    let tx = plain_tx();
    let rx = RxConfig::matching(&tx);
    let x = run_channel(&transmit_dibits(&data, &tx).unwrap(), &ChannelConfig::bench_lab(), 4).unwrap();
    let a = run_rx(&x, &rx).unwrap();
    let b = run_rx(&rotate_quarter_turns(&x, 1), &rx).unwrap();
    let m = &rx.mapping;
    assert_eq!(a.channel_dibits.len(), b.channel_dibits.len());
    // Exact zeros from the empty filter history slice the same either way.
    let start = a.symbols.iter().position(|v| v.norm() > 1e-9).unwrap();
    for (da, db) in a.channel_dibits[start..].iter().zip(&b.channel_dibits[start..]) {
        assert_eq!(*db, m.dibit_at_phase((m.phase_index(*da) + 1) % 4));
    }
}

#[test]
fn differential_coding_hides_rotations() {
    let data = random_dibits(20_000, 13);
    let tx = TxConfig::default();
    let rx = RxConfig::matching(&tx);
    let x = run_channel(&transmit_dibits(&data, &tx).unwrap(), &ChannelConfig::bench_lab(), 4).unwrap();
    let reference = run_rx(&x, &rx).unwrap();
    // Only the first decoded dibit after the all-zero history sees the rotation.
    let start = reference.symbols.iter().position(|v| v.norm() > 1e-9).unwrap() + 1;
    for k in 1..4 {
        let out = run_rx(&rotate_quarter_turns(&x, k), &rx).unwrap().dibits;
        assert_eq!(out[start..], reference.dibits[start..], "k={k}");
    }
}

#[test]
fn slicer_error_rates_match_theory_at_6db() {
    let n = 600_000;
    let ebn0 = 10f64.powf(0.6);
    // Unit-energy symbols; Es/N0 = 2·Eb/N0, noise σ² = N0/2 per dimension.
    let sigma = (1.0 / (2.0 * 2.0 * ebn0)).sqrt();
    let data = random_dibits(n, 14);
    let mut r = rng(15);
    let noisy: Vec<_> = data.iter().map(|&d| gray_point(d) + gaussian(&mut r, sigma)).collect();
    let decided = decide(&noisy, &Constellation::default());
    let ser = decided.iter().zip(&data).filter(|(a, b)| a != b).count() as f64 / n as f64;
    let ber = decided.iter().zip(&data).map(|(a, b)| (a ^ b).count_ones()).sum::<u32>() as f64 / (2 * n) as f64;
    let q = q_oracle((2.0 * ebn0).sqrt());
    assert!((ber / q - 1.0).abs() < 0.1, "ber={ber} q={q}");
    assert!((ser / (2.0 * q - q * q) - 1.0).abs() < 0.1, "ser={ser}");
}

#[test]
fn genie_awgn_reference_uses_library_noise_scale() {
    let tx = plain_tx();
    let data = random_dibits(50_000, 16);
    let s = transmit_dibits(&data, &tx).unwrap();
    let noisy = apply_awgn(&s, NoiseLevel::EbN0Db(6.0), 2, 4, 17).unwrap();
    let noise_power = mean(noisy.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()));
    let es = mean(s.iter().map(|v| v.norm_sqr())) * 4.0;
    let esn0_db = 10.0 * (es / noise_power).log10();
    assert!((esn0_db - (6.0 + 10.0 * 2f64.log10())).abs() < 0.1, "{esn0_db}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn detector_vanishes_at_every_rotation(d in 0u8..4, k in 0u8..4, scale in 0.1f64..10.0) {
        let p = rotate_quarter_turns(&[gray_point(d) * scale], k)[0];
        prop_assert!(costas_error(p).abs() < 1e-12);
    }

    #[test]
    fn loop_states_stay_in_bounds(
        tf in 0.0f64..0.99,
        ppm in -1000.0f64..1000.0,
        cfo in -2e-3f64..2e-3,
        db in 0.0f64..30.0,
        seed in any::<u64>(),
    ) {
        let data = random_dibits(3_000, seed);
        let rx = RxConfig::default();
        let ch = ChannelConfig {
            timing_frac: tf,
            clock_ppm: ppm,
            cfo,
            snr_eb_n0_db: NoiseLevel::EbN0Db(db),
            seed,
            ..ChannelConfig::ideal()
        };
        let out = link(&data, &ch, &rx);
        let l = &rx.loops;
        for c in &out.trajectories.clock {
            prop_assert!((0.0..l.nfilts as f64).contains(&c.filt_index));
            prop_assert!((c.rate - 4.0).abs() <= 4.0 * l.max_rate_dev + 1e-12);
        }
        for &(phase, freq) in &out.trajectories.carrier {
            prop_assert!((-PI..PI).contains(&phase));
            prop_assert!(freq.abs() <= l.costas_max_freq);
        }
        for &e in &out.trajectories.tap_energy {
            prop_assert!((WEIGHT_ENERGY_BAND.0..=WEIGHT_ENERGY_BAND.1).contains(&e));
        }
        prop_assert!(out.symbols.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }
}
