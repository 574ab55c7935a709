//! Transmit chain: byte sources, dibit unpacking, differential coding,
//! symbol mapping and root-raised-cosine pulse shaping.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::dsp::{design_rrc, FirFilter, FirTaps};
use crate::rng::rng_from_seed;
use crate::{ComplexSample, Dibit, Error, Result};

/// Where transmitted bytes come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ByteSource {
    /// Independent uniform bytes in `[lo, hi)`.
    RandomUniform {
        lo: u16,
        hi: u16,
        #[serde(default)]
        seed: u64,
    },
    /// A fixed list, repeated verbatim.
    Vector { bytes: Vec<u8> },
}

/// Generates `n` bytes from `src`.
pub fn source_bytes(src: &ByteSource, n: usize) -> Result<Vec<u8>> {
    match src {
        ByteSource::RandomUniform { lo, hi, seed } => {
            if lo >= hi || *hi > 256 {
                return Err(Error::invalid(
                    "source",
                    format!("random range [{lo}, {hi}) must satisfy 0 <= lo < hi <= 256"),
                ));
            }
            let mut rng = rng_from_seed(*seed);
            Ok((0..n)
                .map(|_| rng.random_range(*lo..*hi) as u8)
                .collect())
        }
        ByteSource::Vector { bytes } => {
            if bytes.is_empty() {
                return Err(Error::Empty("vector source"));
            }
            Ok(bytes.iter().copied().cycle().take(n).collect())
        }
    }
}

/// How bytes are split into dibits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnpackMode {
    /// Each byte already is a dibit (values `0..4`).
    Low2,
    /// Four dibits per byte, most significant pair first.
    #[default]
    MsbFirst,
    /// Four dibits per byte, least significant pair first.
    LsbFirst,
}

impl UnpackMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UnpackMode::Low2 => "low2",
            UnpackMode::MsbFirst => "msb_first",
            UnpackMode::LsbFirst => "lsb_first",
        }
    }

    pub fn dibits_per_byte(self) -> usize {
        match self {
            UnpackMode::Low2 => 1,
            _ => 4,
        }
    }
}

pub fn unpack_dibits(bytes: &[u8], mode: UnpackMode) -> Result<Vec<Dibit>> {
    match mode {
        UnpackMode::Low2 => {
            if let Some(pos) = bytes.iter().position(|&b| b >= 4) {
                return Err(Error::invalid(
                    "bytes",
                    format!("low2 unpacking needs values below 4, byte {pos} is {}", bytes[pos]),
                ));
            }
            Ok(bytes.to_vec())
        }
        UnpackMode::MsbFirst => Ok(bytes
            .iter()
            .flat_map(|&b| [b >> 6, (b >> 4) & 3, (b >> 2) & 3, b & 3])
            .collect()),
        UnpackMode::LsbFirst => Ok(bytes
            .iter()
            .flat_map(|&b| [b & 3, (b >> 2) & 3, (b >> 4) & 3, b >> 6])
            .collect()),
    }
}

/// Running sum mod 4: `out[k] = (in[k] + out[k-1]) mod 4`, `out[-1] = initial`.
pub fn diff_encode(dibits: &[Dibit], initial: Dibit) -> Vec<Dibit> {
    let mut prev = initial & 3;
    dibits
        .iter()
        .map(|&d| {
            prev = (prev + d) & 3;
            prev
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TxConfig {
    pub sps: usize,
    pub rolloff: f64,
    pub ntaps: usize,
    /// Differentially encode the data in the constellation's phase-index
    /// domain, which makes the link immune to 90° carrier ambiguity.
    pub differential: bool,
    pub mapping: Constellation,
    pub amplitude: f64,
}

impl Default for TxConfig {
    fn default() -> Self {
        Self {
            sps: 4,
            rolloff: 0.35,
            ntaps: 89,
            differential: true,
            mapping: Constellation::default(),
            amplitude: 1.0,
        }
    }
}

impl TxConfig {
    pub fn validate(&self) -> Result<()> {
        self.pulse()?;
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::invalid("tx.amplitude", "must be positive and finite"));
        }
        Ok(())
    }

    /// The pulse-shaping filter this configuration transmits with.
    pub fn pulse(&self) -> Result<FirTaps> {
        design_rrc(self.sps, self.rolloff, self.ntaps).map_err(|e| match e {
            Error::InvalidParameter { field, reason } => Error::InvalidParameter {
                field: format!("tx.{field}"),
                reason,
            },
            other => other,
        })
    }
}

/// Maps data dibits onto the dibits actually placed on the air.
///
/// Without differential coding this is the identity. With it, each data
/// dibit selects a phase step (its own phase index, so the Gray property
/// carries over to phase-step errors) which is accumulated mod 4.
pub fn encode_channel_dibits(data: &[Dibit], cfg: &TxConfig) -> Vec<Dibit> {
    if !cfg.differential {
        return data.to_vec();
    }
    let steps: Vec<u8> = data.iter().map(|&d| cfg.mapping.phase_index(d)).collect();
    diff_encode(&steps, 0)
        .into_iter()
        .map(|p| cfg.mapping.dibit_at_phase(p))
        .collect()
}

pub fn map_symbols(dibits: &[Dibit], cfg: &TxConfig) -> Vec<ComplexSample> {
    dibits
        .iter()
        .map(|&d| cfg.mapping.point(d) * cfg.amplitude)
        .collect()
}

/// Zero-stuffs each symbol to `sps` samples and filters with the RRC pulse.
/// The output is `symbols.len() · sps` samples long and is delayed by the
/// pulse's group delay.
pub fn shape_pulses(symbols: &[ComplexSample], cfg: &TxConfig) -> Result<Vec<ComplexSample>> {
    let taps = cfg.pulse()?;
    let mut filter = FirFilter::new(&taps);
    let zero = ComplexSample::default();
    let mut out = Vec::with_capacity(symbols.len() * cfg.sps);
    for &s in symbols {
        out.push(filter.push(s));
        for _ in 1..cfg.sps {
            out.push(filter.push(zero));
        }
    }
    Ok(out)
}

/// Full transmit chain from data dibits to baseband samples.
pub fn transmit_dibits(data: &[Dibit], cfg: &TxConfig) -> Result<Vec<ComplexSample>> {
    cfg.validate()?;
    if data.iter().any(|&d| d > 3) {
        return Err(Error::invalid("dibits", "values must be below 4"));
    }
    let symbols = map_symbols(&encode_channel_dibits(data, cfg), cfg);
    shape_pulses(&symbols, cfg)
}
