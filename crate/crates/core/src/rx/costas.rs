//! Fourth-order Costas loop for QPSK carrier phase and frequency tracking.

use super::lock::{LockDetector, LockStatus};
use crate::dsp::{wrap_phase, LoopGains};
use crate::ComplexSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostasParams {
    pub loop_bw: f64,
    pub damping: f64,
    /// Capture range: largest tracked frequency, radians per symbol.
    pub max_freq: f64,
    pub lock_window: usize,
    pub lock_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct Costas {
    phase: f64,
    freq: f64,
    gains: LoopGains,
    max_freq: f64,
    lock: LockDetector,
}

/// Phase detector output for one derotated symbol. Zero at every 90°
/// rotation of the QPSK points.
pub fn costas_error(v: ComplexSample) -> f64 {
    let sign = |x: f64| if x >= 0.0 { 1.0 } else { -1.0 };
    sign(v.re) * v.im - sign(v.im) * v.re
}

impl Costas {
    pub fn new(p: &CostasParams) -> Self {
        Self {
            phase: 0.0,
            freq: 0.0,
            gains: LoopGains::from_bandwidth(p.loop_bw, p.damping),
            max_freq: p.max_freq,
            lock: LockDetector::new(p.lock_window, p.lock_threshold),
        }
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Frequency estimate in radians per symbol.
    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn lock_status(&self) -> LockStatus {
        self.lock.status()
    }

    pub fn push(&mut self, z: ComplexSample) -> ComplexSample {
        let v = z * ComplexSample::from_polar(1.0, -self.phase);
        let e = costas_error(v);
        self.freq = (self.freq + self.gains.beta * e).clamp(-self.max_freq, self.max_freq);
        self.phase = wrap_phase(self.phase + self.gains.alpha * e + self.freq);
        self.lock.update(e, v.norm_sqr());
        v
    }

    pub fn process(
        &mut self,
        input: &[ComplexSample],
        mut trace: Option<&mut Vec<(f64, f64)>>,
    ) -> Vec<ComplexSample> {
        input
            .iter()
            .map(|&z| {
                let v = self.push(z);
                if let Some(t) = trace.as_deref_mut() {
                    t.push((self.phase, self.freq));
                }
                v
            })
            .collect()
    }
}
