use std::f64::consts::PI;

use crate::ComplexSample;

/// Wraps a phase into `[-π, π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = phase - two_pi * ((phase + PI) / two_pi).floor();
    // Rounding can land exactly on +π.
    if w >= PI {
        w - two_pi
    } else {
        w
    }
}

/// Produces `n` unit rotators starting at `phase` and stepping by `freq`
/// radians per sample, and the wrapped phase that follows the last one.
pub fn nco_advance(phase: f64, freq: f64, n: usize) -> (f64, Vec<ComplexSample>) {
    let rotators = (0..n)
        .map(|k| ComplexSample::from_polar(1.0, phase + k as f64 * freq))
        .collect();
    (wrap_phase(phase + n as f64 * freq), rotators)
}
