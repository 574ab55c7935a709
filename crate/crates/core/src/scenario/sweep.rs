use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::erfc;

use super::{write_file, Check, Scenario, ScenarioOutcome, REPORT_FILE, SWEEP_FILE};
use crate::analysis::{write_table, LinkReport};
use crate::channel::{apply_awgn, NoiseLevel};
use crate::constellation::decide;
use crate::dsp::fir_filter;
use crate::rng::derive_seed;
use crate::tx::{map_symbols, shape_pulses, source_bytes, ByteSource, TxConfig};
use crate::{ComplexSample, Error, Result};

/// Eb/N0 grid and stopping rule for the genie-synchronized BER sweep.
///
/// Each point runs whole chunks until it has seen `target_errors` bit
/// errors and at least `min_bits` bits, or has reached `max_bits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub ebn0_db: Vec<f64>,
    pub min_bits: u64,
    pub max_bits: u64,
    pub target_errors: u64,
    pub chunk_symbols: usize,
    /// Largest accepted relative deviation from theory.
    pub tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ebn0_db: vec![4.0, 6.0, 8.0],
            min_bits: 1_000_000,
            max_bits: 20_000_000,
            target_errors: 2_000,
            chunk_symbols: 1 << 16,
            tolerance: 0.15,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ebn0_db.is_empty() {
            return Err(Error::invalid("sweep.ebn0_db", "needs at least one point"));
        }
        if self.ebn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep.ebn0_db", "points must be finite"));
        }
        if self.min_bits < super::MIN_DURATION as u64 * 2 {
            return Err(Error::invalid(
                "sweep.min_bits",
                format!("must be at least {} bits", super::MIN_DURATION * 2),
            ));
        }
        if self.max_bits < self.min_bits {
            return Err(Error::invalid("sweep.max_bits", "must not be below min_bits"));
        }
        if self.chunk_symbols < 1024 {
            return Err(Error::invalid("sweep.chunk_symbols", "must be at least 1024"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("sweep.tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub ebn0_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// `Q(√(2·Eb/N0))`, the coherent Gray-QPSK bit error rate.
    pub theory: f64,
    pub rel_error: f64,
}

/// Bit error rate of the bare modem with perfect timing and carrier.
///
/// Differential coding is forced off so the result compares directly with
/// coherent theory. Symbols are shaped, noised, matched-filtered and
/// sampled at their known peak, `n·sps + ntaps − 1`.
pub fn genie_ber(tx: &TxConfig, ebn0_db: f64, cfg: &SweepConfig, seed: u64) -> Result<SweepPoint> {
    let tx = TxConfig {
        differential: false,
        ..tx.clone()
    };
    tx.validate()?;
    let pulse = tx.pulse()?;
    let sps = tx.sps;
    let flush = (tx.ntaps - 1).div_ceil(sps);
    let (mut bits, mut errors) = (0u64, 0u64);
    let mut chunk = 0u64;
    while bits < cfg.max_bits && (bits < cfg.min_bits || errors < cfg.target_errors) {
        let n = cfg.chunk_symbols;
        let data = source_bytes(
            &ByteSource::RandomUniform {
                lo: 0,
                hi: 4,
                seed: derive_seed(seed, 2 * chunk),
            },
            n,
        )?;
        let mut symbols = map_symbols(&data, &tx);
        symbols.resize(n + flush, ComplexSample::default());
        let shaped = shape_pulses(&symbols, &tx)?;
        let noisy = apply_awgn(
            &shaped,
            NoiseLevel::EbN0Db(ebn0_db),
            2,
            sps,
            derive_seed(seed, 2 * chunk + 1),
        )?;
        let matched = fir_filter(&pulse, &noisy);
        let peaks: Vec<ComplexSample> = (0..n)
            .map(|k| matched[k * sps + tx.ntaps - 1] / tx.amplitude)
            .collect();
        let decided = decide(&peaks, &tx.mapping);
        errors += decided
            .iter()
            .zip(&data)
            .map(|(r, t)| ((r ^ t) & 3).count_ones() as u64)
            .sum::<u64>();
        bits += 2 * n as u64;
        chunk += 1;
    }
    let ber = errors as f64 / bits as f64;
    let theory = q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt());
    Ok(SweepPoint {
        ebn0_db,
        bits,
        bit_errors: errors,
        ber,
        theory,
        rel_error: (ber - theory).abs() / theory,
    })
}

/// Runs every sweep point, concurrently, each on its own seed stream.
pub fn run_ber_sweep(s: &Scenario) -> Result<Vec<SweepPoint>> {
    s.validate()?;
    s.sweep
        .ebn0_db
        .par_iter()
        .enumerate()
        .map(|(i, &db)| genie_ber(&s.tx, db, &s.sweep, derive_seed(s.seed, i as u64)))
        .collect()
}

pub(crate) fn run_sweep_scenario(s: &Scenario) -> Result<ScenarioOutcome> {
    let points = run_ber_sweep(s)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                format!("{}", p.ebn0_db),
                p.bits.to_string(),
                p.bit_errors.to_string(),
                format!("{:.6e}", p.ber),
                format!("{:.6e}", p.theory),
                format!("{:.4}", p.rel_error),
            ]
        })
        .collect();
    let table = s.output_dir.join(SWEEP_FILE);
    write_table(
        &table,
        &["ebn0_db", "bits", "bit_errors", "ber", "ber_theory", "rel_error"],
        &rows,
    )?;

    let mut extra = Vec::new();
    let mut checks = Vec::new();
    for p in &points {
        let key = format!("{}db", p.ebn0_db);
        extra.push((format!("ber_{key}"), format!("{:.6e}", p.ber)));
        extra.push((format!("ber_theory_{key}"), format!("{:.6e}", p.theory)));
        extra.push((format!("ber_bits_{key}"), p.bits.to_string()));
        checks.push(Check::new(
            format!("ber_{key}"),
            p.rel_error <= s.sweep.tolerance,
            format!(
                "ber={:.4e} theory={:.4e} rel={:.3} (tolerance {})",
                p.ber, p.theory, p.rel_error, s.sweep.tolerance
            ),
        ));
    }
    let report = LinkReport {
        scenario: s.name.as_str().to_owned(),
        seed: s.seed,
        symbols: (points.iter().map(|p| p.bits).sum::<u64>() / 2) as usize,
        extra,
        ..LinkReport::default()
    };
    let path = s.output_dir.join(REPORT_FILE);
    write_file(&path, report.to_text().as_bytes())?;
    Ok(ScenarioOutcome {
        report,
        checks,
        files: vec![table, path],
    })
}
