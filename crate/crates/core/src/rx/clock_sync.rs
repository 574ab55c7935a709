//! Polyphase filterbank symbol timing recovery.
//!
//! The matched filter is designed at `sps · nfilts` oversampling and split
//! into `nfilts` sub-filters, each one a copy of the matched filter delayed
//! by a further `1/nfilts` of a sample. Per output symbol the loop runs the
//! current sub-filter and its derivative over the input, forms the
//! maximum-likelihood timing error `re(y)·re(dy) + im(y)·im(dy)`, and steers
//! a fractional bank position `k` with a second-order loop. Walking `k`
//! past either end of the bank slips the input pointer by one sample.
//!
//! ```txt
//!  input  ─┬─► bank[k]  ──► y ──┬──────────────► symbol
//!          └─► dbank[k] ──► dy ─┴─► e = Re(y·conj(dy)) ─► loop ─► k, rate
//! ```

use std::f64::consts::PI;

use super::lock::{EyeDetector, LockStatus};
use crate::dsp::{design_rrc, polyphase_decompose, LoopGains, PolyphaseBank};
use crate::{ComplexSample, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockSyncParams {
    pub sps: usize,
    pub rolloff: f64,
    /// Matched-filter length in symbol-rate taps (odd).
    pub ntaps: usize,
    pub nfilts: usize,
    pub loop_bw: f64,
    pub damping: f64,
    /// Largest allowed relative deviation of the rate from `sps`.
    pub max_rate_dev: f64,
    pub lock_window: usize,
    /// Largest ratio of half-symbol-offset to on-time matched-filter power
    /// that still counts as locked.
    pub lock_threshold: f64,
}

/// Internal state of the symbol clock loop.
#[derive(Debug, Clone)]
pub struct ClockSync {
    bank: PolyphaseBank,
    sps: usize,
    /// Fractional bank position, kept in `[0, nfilts)`.
    k: f64,
    /// Rate deviation from `sps`, in sub-filter steps per symbol.
    rate_dev: f64,
    max_dev: f64,
    gains: LoopGains,
    ted_gain: f64,
    buf: Vec<ComplexSample>,
    pos: usize,
    /// Input samples drained from the front of `buf` so far.
    drained: usize,
    /// Samples kept behind `pos`: the bank history plus half a symbol.
    lead: usize,
    lock: EyeDetector,
}

/// Per-symbol loop observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockSample {
    /// Fractional bank position used for this symbol.
    pub filt_index: f64,
    /// Samples-per-symbol estimate after this update.
    pub rate: f64,
    /// Timing error estimate in samples.
    pub error: f64,
    /// Input-sample position this symbol was taken at, up to a constant
    /// filter delay.
    pub time: f64,
}

impl ClockSync {
    pub fn new(p: &ClockSyncParams) -> Result<Self> {
        let nfilts = p.nfilts.max(1);
        let proto = design_rrc(p.sps * nfilts, p.rolloff, (p.ntaps - 1) * nfilts + 1)?
            .scaled((nfilts as f64).sqrt());
        let bank = polyphase_decompose(&proto, nfilts)?;
        let ted_gain = ted_slope(p.sps, p.rolloff);
        // Loop math runs on a unit-slope error (samples) and steers `k` in
        // sub-filter steps.
        let gains = LoopGains::from_bandwidth(p.loop_bw, p.damping).scaled(nfilts as f64);
        let lead = bank.bank_len() - 1 + p.sps / 2;
        Ok(Self {
            sps: p.sps,
            k: 0.0,
            rate_dev: 0.0,
            max_dev: p.max_rate_dev * p.sps as f64 * nfilts as f64,
            gains,
            ted_gain,
            buf: vec![ComplexSample::default(); lead],
            pos: lead,
            drained: 0,
            lead,
            lock: EyeDetector::new(p.lock_window, p.lock_threshold),
            bank,
        })
    }

    pub fn nfilts(&self) -> usize {
        self.bank.nfilts()
    }

    /// Current fractional bank position.
    pub fn filt_index(&self) -> f64 {
        self.k
    }

    /// Current samples-per-symbol estimate.
    pub fn rate(&self) -> f64 {
        self.sps as f64 + self.rate_dev / self.nfilts() as f64
    }

    pub fn lock_status(&self) -> LockStatus {
        self.lock.status()
    }

    /// Consumes `input` and returns one sample per recovered symbol.
    pub fn process(
        &mut self,
        input: &[ComplexSample],
        mut trace: Option<&mut Vec<ClockSample>>,
    ) -> Vec<ComplexSample> {
        self.buf.extend_from_slice(input);
        let nfilts = self.nfilts() as f64;
        let mut out = Vec::with_capacity(input.len() / self.sps + 1);

        while self.pos < self.buf.len() {
            let k_used = self.k;
            let filt = (k_used.floor() as usize).min(self.nfilts() - 1);
            let (y, dy) = self.filter_at(filt, self.pos);
            let (mid, _) = self.filter_at(filt, self.pos - self.sps / 2);
            let time = self.time_at(k_used);
            let e = (y.re * dy.re + y.im * dy.im) / self.ted_gain;
            out.push(y);

            self.rate_dev = (self.rate_dev + self.gains.beta * e).clamp(-self.max_dev, self.max_dev);
            // At most one bank wrap per symbol, so `pos` never falls behind `lead`.
            self.k += (self.gains.alpha * e + self.rate_dev).clamp(-nfilts, nfilts);
            self.pos += self.sps;
            while self.k >= nfilts {
                self.k -= nfilts;
                self.pos += 1;
            }
            while self.k < 0.0 {
                self.k += nfilts;
                self.pos -= 1;
            }
            self.lock.update(y.norm_sqr(), mid.norm_sqr());
            if let Some(t) = trace.as_deref_mut() {
                t.push(ClockSample {
                    filt_index: k_used,
                    rate: self.rate(),
                    error: e,
                    time,
                });
            }
        }

        let keep_from = self.pos.saturating_sub(self.lead).min(self.buf.len());
        self.buf.drain(..keep_from);
        self.pos -= keep_from;
        self.drained += keep_from;
        out
    }

    fn time_at(&self, k: f64) -> f64 {
        (self.drained + self.pos) as f64 - self.lead as f64 + k / self.nfilts() as f64
    }

    /// Sub-filter `filt` and its derivative with the newest tap at `pos`.
    fn filter_at(&self, filt: usize, pos: usize) -> (ComplexSample, ComplexSample) {
        let taps = self.bank.bank(filt);
        let dtaps = self.bank.derivative_bank(filt);
        let mut y = ComplexSample::default();
        let mut dy = ComplexSample::default();
        for (i, (t, d)) in taps.iter().zip(dtaps).enumerate() {
            let s = self.buf[pos - i];
            y += s * t;
            dy += s * d;
        }
        (y, dy)
    }
}

/// Slope of the mean timing-error characteristic at zero offset for random
/// unit-energy symbols, in error units per sample of offset.
///
/// For i.i.d. symbols the expected detector output is `S'(τ)` with
/// `S(τ) = ½ Σₙ p(τ - n·sps)²` and `p` the raised-cosine pulse, so the
/// slope is `-S''(0)`, taken here by finite differences.
pub fn ted_slope(sps: usize, rolloff: f64) -> f64 {
    let s = |tau: f64| -> f64 {
        (-64..=64)
            .map(|n| raised_cosine(tau / sps as f64 - n as f64, rolloff).powi(2))
            .sum::<f64>()
            / 2.0
    };
    let h = 1e-3;
    -(s(h) - 2.0 * s(0.0) + s(-h)) / (h * h)
}

fn raised_cosine(t: f64, beta: f64) -> f64 {
    let sinc = |x: f64| if x.abs() < 1e-12 { 1.0 } else { (PI * x).sin() / (PI * x) };
    let edge = 1.0 / (2.0 * beta);
    if (t.abs() - edge).abs() < 1e-9 {
        return PI / 4.0 * sinc(edge);
    }
    sinc(t) * (PI * beta * t).cos() / (1.0 - (2.0 * beta * t).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raised_cosine_is_nyquist() {
        for beta in [0.25, 0.35, 1.0] {
            assert!((raised_cosine(0.0, beta) - 1.0).abs() < 1e-12);
            for n in 1..6 {
                assert!(raised_cosine(n as f64, beta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ted_slope_is_positive() {
        let k = ted_slope(4, 0.35);
        assert!(k > 0.0 && k < 1.0, "{k}");
    }
}
