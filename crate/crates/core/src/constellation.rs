//! QPSK constellation tables and hard decisions.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use crate::{ComplexSample, Dibit, Error, Result};

/// Four constellation points indexed by dibit.
///
/// The points must share one magnitude and be the four 90° rotations of one
/// another. Besides the dibit → point table, a constellation knows each
/// point's *phase index*: how many quarter turns counter-clockwise it sits
/// from the point of dibit 0. Differential coding runs in the phase-index
/// domain, where a global 90° rotation is a constant offset mod 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[ComplexSample; 4]", into = "[ComplexSample; 4]")]
pub struct Constellation {
    points: [ComplexSample; 4],
    phase_of_dibit: [u8; 4],
    dibit_of_phase: [Dibit; 4],
}

impl Default for Constellation {
    /// Gray-coded QPSK: `0 → (+1+j)/√2`, `1 → (−1+j)/√2`, `2 → (+1−j)/√2`,
    /// `3 → (−1−j)/√2`.
    fn default() -> Self {
        let a = FRAC_1_SQRT_2;
        Self::new([
            ComplexSample::new(a, a),
            ComplexSample::new(-a, a),
            ComplexSample::new(a, -a),
            ComplexSample::new(-a, -a),
        ])
        .expect("default constellation is valid")
    }
}

impl TryFrom<[ComplexSample; 4]> for Constellation {
    type Error = Error;

    fn try_from(points: [ComplexSample; 4]) -> Result<Self> {
        Self::new(points)
    }
}

impl From<Constellation> for [ComplexSample; 4] {
    fn from(c: Constellation) -> Self {
        c.points
    }
}

impl Constellation {
    pub fn new(points: [ComplexSample; 4]) -> Result<Self> {
        const TOL: f64 = 1e-9;
        let r = points[0].norm();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid("mapping", "points must be finite and nonzero"));
        }
        if points.iter().any(|p| (p.norm() - r).abs() > TOL * r.max(1.0)) {
            return Err(Error::invalid("mapping", "points must have equal magnitude"));
        }
        let mut phase_of_dibit = [0u8; 4];
        let mut dibit_of_phase = [u8::MAX; 4];
        for (d, p) in points.iter().enumerate() {
            let turns = (p / points[0]).arg() / FRAC_PI_2;
            let q = turns.round();
            if (turns - q).abs() > 1e-6 {
                return Err(Error::invalid(
                    "mapping",
                    "points must be 90° rotations of one another",
                ));
            }
            let q = q.rem_euclid(4.0) as u8;
            if dibit_of_phase[q as usize] != u8::MAX {
                return Err(Error::invalid("mapping", "points must be distinct"));
            }
            phase_of_dibit[d] = q;
            dibit_of_phase[q as usize] = d as Dibit;
        }
        Ok(Self {
            points,
            phase_of_dibit,
            dibit_of_phase,
        })
    }

    pub fn points(&self) -> &[ComplexSample; 4] {
        &self.points
    }

    pub fn point(&self, dibit: Dibit) -> ComplexSample {
        self.points[dibit as usize]
    }

    /// RMS magnitude of the constellation.
    pub fn rms_magnitude(&self) -> f64 {
        self.points[0].norm()
    }

    pub fn phase_index(&self, dibit: Dibit) -> u8 {
        self.phase_of_dibit[dibit as usize]
    }

    pub fn dibit_at_phase(&self, phase_index: u8) -> Dibit {
        self.dibit_of_phase[(phase_index & 3) as usize]
    }

    /// Nearest-point decision. Exact ties go to the lowest dibit.
    pub fn decide(&self, v: ComplexSample) -> Dibit {
        let mut best = 0;
        let mut best_d = (v - self.points[0]).norm_sqr();
        for (d, p) in self.points.iter().enumerate().skip(1) {
            let dist = (v - p).norm_sqr();
            if dist < best_d {
                best = d;
                best_d = dist;
            }
        }
        best as Dibit
    }

    /// Squared distance from `v` to its nearest point.
    pub fn error_sqr(&self, v: ComplexSample) -> f64 {
        self.points
            .iter()
            .map(|p| (v - p).norm_sqr())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Hard decisions for a whole symbol stream.
pub fn decide(symbols: &[ComplexSample], mapping: &Constellation) -> Vec<Dibit> {
    symbols.iter().map(|&v| mapping.decide(v)).collect()
}
