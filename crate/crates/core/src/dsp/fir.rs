use std::collections::VecDeque;

use super::FirTaps;
use crate::ComplexSample;

/// Streaming real-coefficient FIR filter over complex samples.
///
/// History starts zeroed, so the first `len - 1` outputs contain the
/// filter's start-up transient. The output is not delay compensated: a
/// symmetric design delays the signal by [`FirTaps::group_delay`] samples.
#[derive(Debug, Clone)]
pub struct FirFilter {
    taps: Vec<f64>,
    history: VecDeque<ComplexSample>,
}

impl FirFilter {
    pub fn new(taps: &FirTaps) -> Self {
        let n = taps.len();
        Self {
            taps: taps.coefficients().to_vec(),
            history: VecDeque::from(vec![ComplexSample::default(); n]),
        }
    }

    pub fn push(&mut self, x: ComplexSample) -> ComplexSample {
        self.history.pop_back();
        self.history.push_front(x);
        self.taps
            .iter()
            .zip(self.history.iter())
            .map(|(t, s)| s * t)
            .sum()
    }

    pub fn process(&mut self, input: &[ComplexSample]) -> Vec<ComplexSample> {
        input.iter().map(|&x| self.push(x)).collect()
    }
}

/// Filters `input` with `taps`; one output per input sample.
pub fn fir_filter(taps: &FirTaps, input: &[ComplexSample]) -> Vec<ComplexSample> {
    let h = taps.coefficients();
    (0..input.len())
        .map(|n| {
            let span = h.len().min(n + 1);
            (0..span).map(|k| input[n - k] * h[k]).sum()
        })
        .collect()
}
