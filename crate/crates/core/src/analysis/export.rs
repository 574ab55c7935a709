use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rustfft::FftPlanner;

use crate::{ComplexSample, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdBin {
    /// Frequency in cycles per sample, `-0.5 ..< 0.5`.
    pub freq: f64,
    pub power_db: f64,
}

/// Averaged Hann-windowed periodogram with DC-centered bins.
///
/// Segments of `nfft` samples advance by `nfft - overlap`. A stream shorter
/// than one segment is zero-padded.
pub fn export_psd(x: &[ComplexSample], nfft: usize, overlap: usize) -> Result<Vec<PsdBin>> {
    if nfft < 2 || !nfft.is_power_of_two() {
        return Err(Error::invalid("nfft", format!("must be a power of two, got {nfft}")));
    }
    if overlap >= nfft {
        return Err(Error::invalid("overlap", "must be smaller than nfft"));
    }
    let window: Vec<f64> = (0..nfft)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nfft as f64).cos())
        .collect();
    let wpow: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let step = nfft - overlap;

    let mut acc = vec![0.0; nfft];
    let mut segments = 0usize;
    let mut start = 0;
    loop {
        let mut buf: Vec<ComplexSample> = (0..nfft)
            .map(|i| x.get(start + i).copied().unwrap_or_default() * window[i])
            .collect();
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
        if start + nfft > x.len() {
            break;
        }
    }

    let half = nfft / 2;
    Ok((0..nfft)
        .map(|i| {
            let bin = (i + half) % nfft;
            let p = acc[bin] / (segments as f64 * wpow);
            PsdBin {
                freq: (i as f64 - half as f64) / nfft as f64,
                power_db: 10.0 * (p + 1e-300).log10(),
            }
        })
        .collect())
}

/// The last `n` symbols as `(re, im)` rows.
pub fn export_constellation(v: &[ComplexSample], n: usize) -> Vec<(f64, f64)> {
    v[v.len().saturating_sub(n)..]
        .iter()
        .map(|s| (s.re, s.im))
        .collect()
}

/// Sample phase (`0..sps`) with the most energy, which for a matched-filter
/// output is the symbol instant.
pub fn estimate_symbol_phase(x: &[ComplexSample], sps: usize) -> usize {
    (0..sps.max(1))
        .map(|o| {
            let e: f64 = x.iter().skip(o).step_by(sps.max(1)).map(|s| s.norm_sqr()).sum();
            (o, e)
        })
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

/// Cuts a matched-filter output into eye traces of `span · sps` samples.
///
/// `symbol_phase` is the sample offset of a symbol instant. Each trace
/// starts half a symbol before an instant, so instants land at trace
/// positions `sps/2 + m·sps`.
pub fn export_eye(
    x: &[ComplexSample],
    sps: usize,
    span: usize,
    symbol_phase: usize,
) -> Vec<Vec<ComplexSample>> {
    let len = span * sps;
    let lead = sps / 2;
    let mut traces = Vec::new();
    let mut inst = symbol_phase % sps.max(1);
    if inst < lead {
        inst += sps;
    }
    while inst - lead + len <= x.len() {
        traces.push(x[inst - lead..inst - lead + len].to_vec());
        inst += sps;
    }
    traces
}

/// Writes a tab-separated table with a one-line header.
pub fn write_table<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = header.join("\t");
    s.push('\n');
    for row in rows {
        let _ = writeln!(s, "{}", row.join("\t"));
    }
    std::fs::write(path.as_ref(), s).map_err(|e| Error::Io {
        path: path.as_ref().display().to_string(),
        message: e.to_string(),
    })
}
