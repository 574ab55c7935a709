//! Constant-modulus blind equalizer.

use std::collections::VecDeque;

use crate::ComplexSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmaParams {
    pub len: usize,
    pub step_mu: f64,
    pub modulus_r: f64,
}

/// Weight-energy band outside which the equalizer is considered diverged.
pub const WEIGHT_ENERGY_BAND: (f64, f64) = (0.01, 100.0);

/// Equalizer state: tap weights, input window, and reset count.
#[derive(Debug, Clone)]
pub struct Cma {
    weights: Vec<ComplexSample>,
    window: VecDeque<ComplexSample>,
    step_mu: f64,
    modulus_r: f64,
    resets: usize,
}

impl Cma {
    pub fn new(p: &CmaParams) -> Self {
        let len = p.len.max(1);
        Self {
            weights: center_spike(len),
            window: VecDeque::from(vec![ComplexSample::default(); len]),
            step_mu: p.step_mu,
            modulus_r: p.modulus_r,
            resets: 0,
        }
    }

    pub fn weights(&self) -> &[ComplexSample] {
        &self.weights
    }

    /// Number of times the divergence guard reset the taps.
    pub fn resets(&self) -> usize {
        self.resets
    }

    /// Symbol delay introduced by the center-spike initialization.
    pub fn delay(&self) -> usize {
        self.weights.len() / 2
    }

    pub fn weight_energy(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    pub fn push(&mut self, y: ComplexSample) -> ComplexSample {
        self.window.pop_back();
        self.window.push_front(y);
        let z: ComplexSample = self
            .weights
            .iter()
            .zip(&self.window)
            .map(|(w, x)| w * x)
            .sum();
        let err = z * (z.norm_sqr() - self.modulus_r);
        for (w, x) in self.weights.iter_mut().zip(&self.window) {
            *w -= err * x.conj() * self.step_mu;
        }
        let energy = self.weight_energy();
        if !(WEIGHT_ENERGY_BAND.0..=WEIGHT_ENERGY_BAND.1).contains(&energy) {
            self.weights = center_spike(self.weights.len());
            self.resets += 1;
        }
        z
    }

    pub fn process(&mut self, input: &[ComplexSample]) -> Vec<ComplexSample> {
        input.iter().map(|&y| self.push(y)).collect()
    }
}

fn center_spike(len: usize) -> Vec<ComplexSample> {
    let mut w = vec![ComplexSample::default(); len];
    w[len / 2] = ComplexSample::new(1.0, 0.0);
    w
}
