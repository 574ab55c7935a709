use std::f64::consts::PI;

use crate::{Error, Result};

/// Real FIR coefficients together with the oversampling factor they were
/// designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct FirTaps {
    coefficients: Vec<f64>,
    sps: usize,
}

impl FirTaps {
    pub fn new(coefficients: Vec<f64>, sps: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Empty("tap list"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("taps", "coefficients must be finite"));
        }
        if sps == 0 {
            return Err(Error::invalid("sps", "must be positive"));
        }
        Ok(Self { coefficients, sps })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Delay, in samples, of a symmetric filter of this length.
    pub fn group_delay(&self) -> f64 {
        (self.coefficients.len() - 1) as f64 / 2.0
    }

    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Returns a copy with every coefficient multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * gain).collect(),
            sps: self.sps,
        }
    }
}

/// Designs a unit-energy root-raised-cosine filter.
///
/// `sps` is the number of taps per symbol period, `rolloff` the excess
/// bandwidth factor and `ntaps` the (odd) filter length. The removable
/// singularities at `t = 0` and `t = ±T/(4·rolloff)` are evaluated by their
/// limits.
pub fn design_rrc(sps: usize, rolloff: f64, ntaps: usize) -> Result<FirTaps> {
    if sps < 2 {
        return Err(Error::invalid("sps", format!("must be at least 2, got {sps}")));
    }
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return Err(Error::invalid(
            "rolloff",
            format!("must lie in (0, 1], got {rolloff}"),
        ));
    }
    if ntaps.is_multiple_of(2) {
        return Err(Error::invalid(
            "ntaps",
            format!("must be odd so a center tap exists, got {ntaps}"),
        ));
    }

    let center = (ntaps / 2) as i64;
    let mut taps: Vec<f64> = (0..ntaps as i64)
        .map(|i| rrc_pulse((i - center) as f64 / sps as f64, rolloff))
        .collect();

    // Evaluate the pulse from both ends so the taps are bit-exact mirror
    // images regardless of rounding in the closed form.
    for i in 0..ntaps / 2 {
        taps[ntaps - 1 - i] = taps[i];
    }

    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    FirTaps::new(taps, sps)
}

/// Root-raised-cosine impulse response at `t` symbol periods (unnormalized).
fn rrc_pulse(t: f64, beta: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if t.abs() < EPS {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (t.abs() - edge).abs() < EPS {
        let arg = PI / (4.0 * beta);
        return beta / 2f64.sqrt()
            * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}
