use super::FirTaps;
use crate::{Error, Result};

/// A prototype filter split into `nfilts` interleaved sub-filters, plus the
/// same split of the prototype's first difference.
///
/// Bank `k` holds prototype taps `k, k + nfilts, k + 2·nfilts, …`. The
/// prototype is expected to be designed at `sps · nfilts` oversampling so
/// that stepping through the banks moves the sampling instant in steps of
/// `1/nfilts` of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyphaseBank {
    banks: Vec<Vec<f64>>,
    derivative_banks: Vec<Vec<f64>>,
}

impl PolyphaseBank {
    pub fn nfilts(&self) -> usize {
        self.banks.len()
    }

    /// Length of every sub-filter.
    pub fn bank_len(&self) -> usize {
        self.banks[0].len()
    }

    pub fn bank(&self, k: usize) -> &[f64] {
        &self.banks[k]
    }

    pub fn derivative_bank(&self, k: usize) -> &[f64] {
        &self.derivative_banks[k]
    }

    pub fn banks(&self) -> &[Vec<f64>] {
        &self.banks
    }

    /// Re-interleaves the banks into a single tap list (including the zero
    /// padding added during decomposition).
    pub fn interleave(&self) -> Vec<f64> {
        let n = self.nfilts();
        (0..n * self.bank_len())
            .map(|i| self.banks[i % n][i / n])
            .collect()
    }
}

/// Splits `prototype` into `nfilts` polyphase sub-filters.
///
/// Derivative banks come from the central difference
/// `(h[m+1] - h[m-1]) / 2` of the prototype, scaled by `nfilts` so they
/// measure slope per input sample rather than per sub-filter step.
pub fn polyphase_decompose(prototype: &FirTaps, nfilts: usize) -> Result<PolyphaseBank> {
    if nfilts < 1 {
        return Err(Error::invalid("nfilts", "must be at least 1"));
    }
    let h = prototype.coefficients();
    let at = |m: isize| -> f64 {
        if m < 0 || m as usize >= h.len() {
            0.0
        } else {
            h[m as usize]
        }
    };
    let diff: Vec<f64> = (0..h.len() as isize)
        .map(|m| (at(m + 1) - at(m - 1)) / 2.0 * nfilts as f64)
        .collect();

    let len = h.len().div_ceil(nfilts);
    let split = |taps: &[f64]| -> Vec<Vec<f64>> {
        (0..nfilts)
            .map(|k| {
                (0..len)
                    .map(|i| taps.get(k + i * nfilts).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect()
    };
    Ok(PolyphaseBank {
        banks: split(h),
        derivative_banks: split(&diff),
    })
}
