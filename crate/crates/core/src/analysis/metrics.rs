use crate::constellation::Constellation;
use crate::{ComplexSample, Dibit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub ser: f64,
    pub ber: f64,
    /// Number of dibits compared.
    pub symbols: usize,
    pub symbol_errors: usize,
    pub bit_errors: usize,
}

/// Symbol and bit error rates from `sync_index` to the end of `rx`.
///
/// `tx` is read cyclically starting at `rotation`, so it can be a single
/// period of a repeating reference or the full transmitted stream. Bit
/// errors count differing bits between dibit labels, which for a Gray
/// mapping is the number of flipped data bits.
pub fn compute_error_rates(
    rx: &[Dibit],
    tx: &[Dibit],
    sync_index: usize,
    rotation: usize,
) -> Result<ErrorRates> {
    if tx.is_empty() {
        return Err(Error::Empty("reference"));
    }
    let region = rx.get(sync_index..).unwrap_or(&[]);
    if region.is_empty() {
        return Err(Error::Empty("post-sync region"));
    }
    let (mut symbol_errors, mut bit_errors) = (0usize, 0usize);
    for (j, &r) in region.iter().enumerate() {
        let t = tx[(rotation + j) % tx.len()];
        if r != t {
            symbol_errors += 1;
            bit_errors += ((r ^ t) & 3).count_ones() as usize;
        }
    }
    let n = region.len();
    Ok(ErrorRates {
        ser: symbol_errors as f64 / n as f64,
        ber: bit_errors as f64 / (2 * n) as f64,
        symbols: n,
        symbol_errors,
        bit_errors,
    })
}

/// RMS error vector magnitude in percent of the RMS constellation magnitude.
pub fn compute_evm(v: &[ComplexSample], mapping: &Constellation) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Empty("EVM window"));
    }
    let mse = v.iter().map(|&s| mapping.error_sqr(s)).sum::<f64>() / v.len() as f64;
    Ok(100.0 * mse.sqrt() / mapping.rms_magnitude())
}

/// EVM over the final `fraction` of the stream.
pub fn evm_tail(v: &[ComplexSample], mapping: &Constellation, fraction: f64) -> Result<f64> {
    let n = ((v.len() as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    compute_evm(&v[v.len() - n..], mapping)
}
