//! DSP building blocks shared by the transmitter, channel and receiver.

mod fir;
mod loop_filter;
mod nco;
mod polyphase;
mod rrc;

pub use fir::{fir_filter, FirFilter};
pub use loop_filter::LoopGains;
pub use nco::{nco_advance, wrap_phase};
pub use polyphase::{polyphase_decompose, PolyphaseBank};
pub use rrc::{design_rrc, FirTaps};

use crate::ComplexSample;

/// Returns `true` when every component of every sample is finite.
pub fn all_finite(x: &[ComplexSample]) -> bool {
    x.iter().all(|s| s.re.is_finite() && s.im.is_finite())
}

/// Mean of `|x|²`, zero for an empty stream.
pub fn mean_power(x: &[ComplexSample]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64
}
