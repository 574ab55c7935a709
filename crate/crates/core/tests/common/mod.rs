//! Reference computations for the integration tests. Nothing here calls
//! into the library's own math.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Gaussian tail probability by Craig's integral,
/// `Q(x) = 1/π ∫₀^{π/2} exp(-x² / (2 sin²θ)) dθ`, with composite Simpson.
pub fn q_oracle(x: f64) -> f64 {
    assert!(x >= 0.0);
    let n = 20_000;
    let h = (PI / 2.0) / n as f64;
    let f = |th: f64| {
        let s = th.sin();
        if s == 0.0 {
            0.0
        } else {
            (-x * x / (2.0 * s * s)).exp()
        }
    };
    let mut acc = f(0.0) + f(PI / 2.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 / PI
}

/// Root-raised-cosine pulse at `t` samples, from the inverse Fourier
/// transform of the square-rooted raised-cosine spectrum (numerically).
pub fn rrc_from_spectrum(sps: usize, beta: f64, t: f64) -> f64 {
    let tsym = sps as f64;
    let f1 = (1.0 - beta) / (2.0 * tsym);
    let f2 = (1.0 + beta) / (2.0 * tsym);
    let amp = |f: f64| -> f64 {
        if f <= f1 {
            1.0
        } else if f <= f2 {
            (0.5 * (1.0 + (PI * tsym / beta * (f - f1)).cos())).sqrt()
        } else {
            0.0
        }
    };
    let n = 40_000;
    let h = f2 / n as f64;
    let g = |f: f64| amp(f) * (2.0 * PI * f * t).cos();
    let mut acc = g(0.0) + g(f2);
    for i in 1..n {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * acc * h / 3.0
}

/// Direct-form full convolution.
pub fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, sigma: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * sigma
}

/// Unit-energy QPSK point for a Gray dibit, written out by hand.
pub fn gray_point(d: u8) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match d {
        0 => Complex64::new(s, s),
        1 => Complex64::new(-s, s),
        2 => Complex64::new(s, -s),
        _ => Complex64::new(-s, -s),
    }
}

/// Quadrant slicer matching `gray_point`.
pub fn gray_slice(v: Complex64) -> u8 {
    (u8::from(v.im < 0.0) << 1) | u8::from(v.re < 0.0)
}

pub fn random_dibits(n: usize, seed: u64) -> Vec<u8> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(0..4u8)).collect()
}

/// Mean of angles, as the argument of the mean unit phasor.
pub fn circular_mean(angles: impl Iterator<Item = f64>) -> f64 {
    let s: Complex64 = angles.map(|a| Complex64::from_polar(1.0, a)).sum();
    s.arg()
}

pub fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    s / n as f64
}
