//! Impairment chain standing in for the over-the-air hop.
//!
//! [`run_channel`] always applies multipath, then sample-timing skew, then
//! carrier offset, then white noise. The order is fixed so runs with the
//! same configuration are comparable.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dsp::{mean_power, nco_advance};
use crate::rng::rng_from_seed;
use crate::{ComplexSample, Error, Result};

/// Noise setting, either an Eb/N0 in dB or no noise at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseLevel {
    EbN0Db(f64),
    #[serde(with = "noiseless_tag")]
    Noiseless,
}

mod noiseless_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("noiseless")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "noiseless" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected a number or \"noiseless\", got {s:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Complex path gains at one-sample spacing; the first is the direct path.
    pub taps: Vec<ComplexSample>,
    /// Carrier frequency offset in cycles per sample.
    pub cfo: f64,
    /// Initial carrier phase in radians.
    pub phase0: f64,
    /// Fractional timing delay as a fraction of one symbol, in `[0, 1)`.
    pub timing_frac: f64,
    /// Receiver sample-clock skew; positive values mean the receiver samples
    /// faster, i.e. more samples per symbol.
    pub clock_ppm: f64,
    pub snr_eb_n0_db: NoiseLevel,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self::bench_lab()
    }
}

impl ChannelConfig {
    /// Every impairment disabled.
    pub fn ideal() -> Self {
        Self {
            taps: vec![ComplexSample::new(1.0, 0.0)],
            cfo: 0.0,
            phase0: 0.0,
            timing_frac: 0.0,
            clock_ppm: 0.0,
            snr_eb_n0_db: NoiseLevel::Noiseless,
            seed: 0,
        }
    }

    /// Short bench-top link: a single direct path, no carrier or clock error
    /// and Eb/N0 = 25 dB. This is a modeling choice for a two-antenna lab
    /// setup, not a measured channel.
    pub fn bench_lab() -> Self {
        Self {
            snr_eb_n0_db: NoiseLevel::EbN0Db(25.0),
            ..Self::ideal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() || self.taps.iter().all(|t| t.norm_sqr() == 0.0) {
            return Err(Error::invalid("channel.taps", "need at least one nonzero tap"));
        }
        if self.taps.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
            return Err(Error::invalid("channel.taps", "taps must be finite"));
        }
        if !(self.cfo.is_finite() && self.cfo.abs() < 0.5) {
            return Err(Error::invalid("channel.cfo", "must be finite with |cfo| < 0.5"));
        }
        if !self.phase0.is_finite() {
            return Err(Error::invalid("channel.phase0", "must be finite"));
        }
        if !(0.0..1.0).contains(&self.timing_frac) {
            return Err(Error::invalid("channel.timing_frac", "must lie in [0, 1)"));
        }
        if !(self.clock_ppm.abs() <= 1000.0) {
            return Err(Error::invalid("channel.clock_ppm", "magnitude must not exceed 1000"));
        }
        if let NoiseLevel::EbN0Db(db) = self.snr_eb_n0_db {
            if !db.is_finite() {
                return Err(Error::invalid("channel.snr_eb_n0_db", "Eb/N0 must be finite"));
            }
        }
        Ok(())
    }
}

/// Convolves with the complex tap vector; output length equals input length.
pub fn apply_multipath(x: &[ComplexSample], taps: &[ComplexSample]) -> Vec<ComplexSample> {
    (0..x.len())
        .map(|n| {
            taps.iter()
                .take(n + 1)
                .enumerate()
                .map(|(k, t)| t * x[n - k])
                .sum()
        })
        .collect()
}

/// Rotates sample `k` by `2π·cfo·k + phase0`.
pub fn apply_cfo(x: &[ComplexSample], cfo: f64, phase0: f64) -> Vec<ComplexSample> {
    let (_, rot) = nco_advance(phase0, 2.0 * PI * cfo, x.len());
    x.iter().zip(rot).map(|(s, r)| s * r).collect()
}

/// Resamples `x` with a fixed delay of `delay` samples and a sample-clock
/// skew of `clock_ppm`, using 4-point cubic Lagrange interpolation.
///
/// Output sample `j` is the input evaluated at `j / (1 + ppm·1e-6) - delay`;
/// positions outside the input read as zero. A positive skew therefore
/// yields about `len · ppm·1e-6` extra samples.
pub fn apply_timing(x: &[ComplexSample], delay: f64, clock_ppm: f64) -> Vec<ComplexSample> {
    if x.is_empty() {
        return Vec::new();
    }
    let ratio = 1.0 + clock_ppm * 1e-6;
    let out_len = (((x.len() - 1) as f64 + delay) * ratio).floor() as usize + 1;
    let at = |i: i64| -> ComplexSample {
        if i < 0 || i as usize >= x.len() {
            ComplexSample::default()
        } else {
            x[i as usize]
        }
    };
    (0..out_len)
        .map(|j| {
            let t = j as f64 / ratio - delay;
            let base = t.floor();
            let mu = t - base;
            let i = base as i64;
            if mu == 0.0 {
                return at(i);
            }
            let w_m1 = -mu * (mu - 1.0) * (mu - 2.0) / 6.0;
            let w_0 = (mu + 1.0) * (mu - 1.0) * (mu - 2.0) / 2.0;
            let w_1 = -(mu + 1.0) * mu * (mu - 2.0) / 2.0;
            let w_2 = (mu + 1.0) * mu * (mu - 1.0) / 6.0;
            at(i - 1) * w_m1 + at(i) * w_0 + at(i + 1) * w_1 + at(i + 2) * w_2
        })
        .collect()
}

/// Adds circular complex Gaussian noise for the requested Eb/N0.
///
/// The noise density is set from the measured power of `x`: with `sps`
/// samples per symbol the symbol energy is `P·sps`, and the per-sample
/// complex noise variance equals `N0`, so a unit-energy matched filter sees
/// exactly the requested Es/N0 = Eb/N0 · bits_per_symbol.
pub fn apply_awgn(
    x: &[ComplexSample],
    noise: NoiseLevel,
    bits_per_symbol: u32,
    sps: usize,
    seed: u64,
) -> Result<Vec<ComplexSample>> {
    let ebn0_db = match noise {
        NoiseLevel::Noiseless => return Ok(x.to_vec()),
        NoiseLevel::EbN0Db(db) => db,
    };
    let power = mean_power(x);
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::ZeroSignalPower);
    }
    let es = power * sps as f64;
    let esn0 = 10f64.powf(ebn0_db / 10.0) * bits_per_symbol as f64;
    let sigma = (es / esn0 / 2.0).sqrt();
    let mut rng = rng_from_seed(seed);
    Ok(x.iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + ComplexSample::new(re, im) * sigma
        })
        .collect())
}

/// Rotates every sample by `quarter_turns · 90°`.
///
/// Component swaps and sign flips only, so four turns are an exact identity.
pub fn rotate_quarter_turns(x: &[ComplexSample], quarter_turns: u8) -> Vec<ComplexSample> {
    let r = |s: &ComplexSample| match quarter_turns % 4 {
        0 => *s,
        1 => ComplexSample::new(-s.im, s.re),
        2 => ComplexSample::new(-s.re, -s.im),
        _ => ComplexSample::new(s.im, -s.re),
    };
    x.iter().map(r).collect()
}

/// Applies the whole impairment chain to a stream sampled at `sps` samples
/// per symbol.
pub fn run_channel(
    x: &[ComplexSample],
    cfg: &ChannelConfig,
    sps: usize,
) -> Result<Vec<ComplexSample>> {
    cfg.validate()?;
    let y = apply_multipath(x, &cfg.taps);
    let y = if cfg.timing_frac == 0.0 && cfg.clock_ppm == 0.0 {
        y
    } else {
        apply_timing(&y, cfg.timing_frac * sps as f64, cfg.clock_ppm)
    };
    let y = if cfg.cfo == 0.0 && cfg.phase0 == 0.0 {
        y
    } else {
        apply_cfo(&y, cfg.cfo, cfg.phase0)
    };
    apply_awgn(&y, cfg.snr_eb_n0_db, 2, sps, cfg.seed)
}
