//! Receive chain: clock sync → CMA → Costas → decisions → differential
//! decode → byte packing.

mod clock_sync;
mod cma;
mod costas;
mod lock;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use clock_sync::{ted_slope, ClockSample, ClockSync, ClockSyncParams};
pub use cma::{Cma, CmaParams, WEIGHT_ENERGY_BAND};
pub use costas::{costas_error, Costas, CostasParams};
pub use lock::{EyeDetector, LockDetector, LockStatus};

pub use crate::constellation::decide;
use crate::constellation::Constellation;
use crate::tx::{TxConfig, UnpackMode};
use crate::{ComplexSample, Dibit, Error, Result};

/// Receiver parameters: the pulse and mapping it expects plus loop tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxConfig {
    pub sps: usize,
    pub rolloff: f64,
    pub ntaps: usize,
    pub differential: bool,
    pub mapping: Constellation,
    pub loops: LoopConfig,
}

/// Tracking-loop parameters.
///
/// Bandwidths are normalized (radians per symbol update) and map onto
/// proportional/integral gains through [`crate::dsp::LoopGains::from_bandwidth`]. The
/// clock loop's timing detector is scaled to unit slope, so `clock_bw`
/// directly sets the loop's response in symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    pub nfilts: usize,
    pub clock_bw: f64,
    pub clock_damping: f64,
    pub max_rate_dev: f64,
    /// Largest ratio of half-symbol-offset to on-time matched-filter power
    /// that counts as clock lock.
    pub clock_lock_threshold: f64,
    /// Symbols per clock lock-detector window.
    pub clock_lock_window: usize,

    pub cma_enabled: bool,
    pub cma_len: usize,
    pub cma_mu: f64,
    pub cma_modulus: f64,

    pub costas_bw: f64,
    pub costas_damping: f64,
    pub costas_max_freq: f64,
    pub costas_lock_threshold: f64,

    /// Symbols per Costas lock-detector window.
    pub lock_window: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            nfilts: 32,
            clock_bw: 1e-3,
            clock_damping: 1.0,
            max_rate_dev: 0.01,
            clock_lock_threshold: 0.95,
            clock_lock_window: 2000,
            cma_enabled: true,
            cma_len: 11,
            cma_mu: 1e-3,
            cma_modulus: 1.0,
            costas_bw: 2.0 * PI / 100.0,
            costas_damping: 1.0,
            costas_max_freq: 0.5,
            costas_lock_threshold: 0.6,
            lock_window: 500,
        }
    }
}

impl LoopConfig {
    /// Multiplies both tracking-loop bandwidths.
    pub fn with_bandwidth_scale(mut self, scale: f64) -> Self {
        self.clock_bw *= scale;
        self.costas_bw *= scale;
        self
    }
}

impl Default for RxConfig {
    fn default() -> Self {
        Self::matching(&TxConfig::default())
    }
}

impl RxConfig {
    /// Receiver with default loops whose pulse shape, mapping and coding
    /// match a transmitter configuration.
    pub fn matching(tx: &TxConfig) -> Self {
        Self::with_loops(tx, LoopConfig::default())
    }

    pub fn with_loops(tx: &TxConfig, loops: LoopConfig) -> Self {
        Self {
            sps: tx.sps,
            rolloff: tx.rolloff,
            ntaps: tx.ntaps,
            differential: tx.differential,
            mapping: tx.mapping.clone(),
            loops,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, "must be positive and finite"))
            }
        };
        if self.sps < 2 {
            return Err(Error::invalid("rx.sps", "must be at least 2"));
        }
        if self.ntaps.is_multiple_of(2) {
            return Err(Error::invalid("rx.ntaps", "must be odd"));
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::invalid("rx.rolloff", "must lie in (0, 1]"));
        }
        let l = &self.loops;
        if l.nfilts == 0 {
            return Err(Error::invalid("rx.nfilts", "must be at least 1"));
        }
        if l.cma_len == 0 {
            return Err(Error::invalid("rx.cma_len", "must be at least 1"));
        }
        if l.lock_window == 0 {
            return Err(Error::invalid("rx.lock_window", "must be at least 1"));
        }
        if l.clock_lock_window == 0 {
            return Err(Error::invalid("rx.clock_lock_window", "must be at least 1"));
        }
        positive("rx.clock_bw", l.clock_bw)?;
        positive("rx.clock_damping", l.clock_damping)?;
        positive("rx.max_rate_dev", l.max_rate_dev)?;
        positive("rx.cma_mu", l.cma_mu)?;
        positive("rx.cma_modulus", l.cma_modulus)?;
        positive("rx.costas_bw", l.costas_bw)?;
        positive("rx.costas_damping", l.costas_damping)?;
        positive("rx.costas_max_freq", l.costas_max_freq)?;
        Ok(())
    }

    pub fn clock_params(&self) -> ClockSyncParams {
        let l = &self.loops;
        ClockSyncParams {
            sps: self.sps,
            rolloff: self.rolloff,
            ntaps: self.ntaps,
            nfilts: l.nfilts,
            loop_bw: l.clock_bw,
            damping: l.clock_damping,
            max_rate_dev: l.max_rate_dev,
            lock_window: l.clock_lock_window,
            lock_threshold: l.clock_lock_threshold,
        }
    }

    pub fn cma_params(&self) -> CmaParams {
        CmaParams {
            len: self.loops.cma_len,
            step_mu: self.loops.cma_mu,
            modulus_r: self.loops.cma_modulus,
        }
    }

    pub fn costas_params(&self) -> CostasParams {
        let l = &self.loops;
        CostasParams {
            loop_bw: l.costas_bw,
            damping: l.costas_damping,
            max_freq: l.costas_max_freq,
            lock_window: l.lock_window,
            lock_threshold: l.costas_lock_threshold,
        }
    }
}

/// First difference mod 4: `out[k] = (in[k] - in[k-1]) mod 4`, `in[-1] = initial`.
pub fn diff_decode(dibits: &[Dibit], initial: Dibit) -> Vec<Dibit> {
    let mut prev = initial & 3;
    dibits
        .iter()
        .map(|&d| {
            let out = (d.wrapping_sub(prev)) & 3;
            prev = d;
            out
        })
        .collect()
}

/// Inverse of [`crate::tx::unpack_dibits`]. A trailing partial byte is
/// dropped.
pub fn pack_bytes(dibits: &[Dibit], mode: UnpackMode) -> Vec<u8> {
    match mode {
        UnpackMode::Low2 => dibits.iter().map(|d| d & 3).collect(),
        UnpackMode::MsbFirst => dibits
            .chunks_exact(4)
            .map(|c| c.iter().fold(0u8, |acc, d| (acc << 2) | (d & 3)))
            .collect(),
        UnpackMode::LsbFirst => dibits
            .chunks_exact(4)
            .map(|c| c.iter().rev().fold(0u8, |acc, d| (acc << 2) | (d & 3)))
            .collect(),
    }
}

/// Maps hard-decided channel dibits back to data dibits (inverse of
/// [`crate::tx::encode_channel_dibits`]).
pub fn decode_channel_dibits(decided: &[Dibit], differential: bool, mapping: &Constellation) -> Vec<Dibit> {
    if !differential {
        return decided.to_vec();
    }
    let phases: Vec<u8> = decided.iter().map(|&d| mapping.phase_index(d)).collect();
    diff_decode(&phases, 0)
        .into_iter()
        .map(|p| mapping.dibit_at_phase(p))
        .collect()
}

/// Loop status collected over a receiver run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RxReport {
    pub clock: LockStatus,
    pub costas: LockStatus,
    pub cma_enabled: bool,
    pub cma_resets: usize,
    pub final_rate: f64,
    pub final_freq: f64,
}

/// Per-symbol loop trajectories.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectories {
    pub clock: Vec<ClockSample>,
    /// Costas `(phase, freq)` after each symbol.
    pub carrier: Vec<(f64, f64)>,
    /// Equalizer weight energy after each symbol.
    pub tap_energy: Vec<f64>,
    pub final_taps: Vec<ComplexSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxOutput {
    /// Clock-sync output, one sample per symbol.
    pub timed: Vec<ComplexSample>,
    /// Equalizer output (equal to `timed` when CMA is disabled).
    pub equalized: Vec<ComplexSample>,
    /// Carrier-corrected symbols fed to the slicer.
    pub symbols: Vec<ComplexSample>,
    /// Hard decisions before differential decoding.
    pub channel_dibits: Vec<Dibit>,
    /// Recovered data dibits.
    pub dibits: Vec<Dibit>,
    pub report: RxReport,
    pub trajectories: Trajectories,
}

impl RxOutput {
    /// Recovered bytes, packing from dibit `offset` on.
    pub fn bytes(&self, mode: UnpackMode, offset: usize) -> Vec<u8> {
        pack_bytes(self.dibits.get(offset..).unwrap_or(&[]), mode)
    }
}

/// Runs the full recovery chain over a received sample stream.
///
/// Loss of lock never aborts the run; it shows up in [`RxReport`].
pub fn run_rx(x: &[ComplexSample], cfg: &RxConfig) -> Result<RxOutput> {
    cfg.validate()?;
    let mut trajectories = Trajectories::default();

    let mut clock = ClockSync::new(&cfg.clock_params())?;
    let timed = clock.process(x, Some(&mut trajectories.clock));

    let (equalized, cma_resets) = if cfg.loops.cma_enabled {
        let mut cma = Cma::new(&cfg.cma_params());
        let mut out = Vec::with_capacity(timed.len());
        trajectories.tap_energy.reserve(timed.len());
        for &y in &timed {
            out.push(cma.push(y));
            trajectories.tap_energy.push(cma.weight_energy());
        }
        trajectories.final_taps = cma.weights().to_vec();
        (out, cma.resets())
    } else {
        (timed.clone(), 0)
    };

    let mut costas = Costas::new(&cfg.costas_params());
    let symbols = costas.process(&equalized, Some(&mut trajectories.carrier));

    let channel_dibits = decide(&symbols, &cfg.mapping);
    let dibits = decode_channel_dibits(&channel_dibits, cfg.differential, &cfg.mapping);

    Ok(RxOutput {
        timed,
        equalized,
        symbols,
        channel_dibits,
        dibits,
        report: RxReport {
            clock: clock.lock_status(),
            costas: costas.lock_status(),
            cma_enabled: cfg.loops.cma_enabled,
            cma_resets,
            final_rate: clock.rate(),
            final_freq: costas.freq(),
        },
        trajectories,
    })
}
