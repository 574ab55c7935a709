use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use super::{
    write_file, Check, Scenario, ScenarioKind, CONSTELLATION_FILE, DIBITS_FILE, EYE_FILE, PSD_FILE,
    REPORT_FILE,
};
use crate::analysis::{
    compute_error_rates, detect_frames, estimate_symbol_phase, evm_tail, export_constellation,
    export_eye, export_psd, find_stream_alignment, find_sync, write_table, Frame, FrameMarker,
    LinkReport, SyncPoint,
};
use crate::channel::{rotate_quarter_turns, run_channel};
use crate::dsp::fir_filter;
use crate::rx::{pack_bytes, run_rx, RxOutput};
use crate::tx::{source_bytes, transmit_dibits, unpack_dibits, ByteSource, UnpackMode};
use crate::{ComplexSample, Dibit, Result};

/// Everything one link run produced, before anything is written.
#[derive(Debug, Clone)]
pub struct LinkRun {
    pub report: LinkReport,
    /// Transmitted data dibits.
    pub data: Vec<Dibit>,
    /// Receiver input after the channel (and any forced rotation).
    pub received: Vec<ComplexSample>,
    pub rx: RxOutput,
    pub sync: Option<SyncPoint>,
    /// Frames at the chosen byte alignment.
    pub frames: Vec<Frame>,
}

/// Runs transmitter, channel, receiver and analysis for one scenario
/// without touching the file system.
pub fn run_link(s: &Scenario) -> Result<LinkRun> {
    s.validate()?;
    let a = &s.analysis;
    let mode = s.unpack_mode();
    let src = s.byte_source();
    let bytes = source_bytes(&src, s.duration.div_ceil(mode.dibits_per_byte()))?;
    let mut data = unpack_dibits(&bytes, mode)?;
    data.truncate(s.duration);

    let samples = transmit_dibits(&data, &s.tx)?;
    let received = rotate_quarter_turns(
        &run_channel(&samples, &s.channel_config(), s.tx.sps)?,
        s.rotation,
    );
    let rx = run_rx(&received, &s.rx_config())?;

    // A repeating source is checked against one period in any rotation;
    // anything else against the transmitted stream at a searched delay.
    let (sync, reference, compared) = match &src {
        ByteSource::Vector { bytes } => {
            let period = unpack_dibits(bytes, mode)?;
            (find_sync(&rx.dibits, &period, a.k_periods), period, rx.dibits.len())
        }
        ByteSource::RandomUniform { .. } => {
            let sync = find_stream_alignment(&rx.dibits, &data, a.max_lag, a.align_run);
            let end = sync.map_or(0, |sp| (data.len() + sp.index - sp.rotation).min(rx.dibits.len()));
            (sync, data.clone(), end)
        }
    };
    let rates = match sync {
        Some(sp) if sp.index < compared => Some(compute_error_rates(
            &rx.dibits[..compared],
            &reference,
            sp.index,
            sp.rotation,
        )?),
        _ => None,
    };

    let expected = s.expected_payload();
    let (frames, alignment) = if mode == UnpackMode::Low2 {
        (Vec::new(), None)
    } else {
        let marker = FrameMarker::new(a.marker_prefix, a.payload_len)?;
        best_alignment(&rx.dibits, &marker, a.pack, expected.as_deref())
    };
    let valid_frames = frames
        .iter()
        .filter(|f| Some(f.payload.as_slice()) == expected.as_deref())
        .count();

    let tail = |n: usize| n - ((n as f64 * a.tail_fraction).round() as usize).clamp(1, n.max(1));
    let clock = &rx.trajectories.clock;
    let carrier = &rx.trajectories.carrier;
    let rate_estimate = mean(clock[tail(clock.len())..].iter().map(|c| c.rate)).unwrap_or(rx.report.final_rate);
    let freq_estimate = mean(carrier[tail(carrier.len())..].iter().map(|c| c.1)).unwrap_or(rx.report.final_freq);
    let evm = if rx.symbols.is_empty() {
        None
    } else {
        Some(evm_tail(&rx.symbols, &s.tx.mapping, a.tail_fraction)?)
    };

    let extra = vec![
        ("tx_unpack".to_owned(), mode.as_str().to_owned()),
        ("rx_pack".to_owned(), a.pack.as_str().to_owned()),
        ("differential".to_owned(), s.tx.differential.to_string()),
        ("rotation_quarters".to_owned(), s.rotation.to_string()),
        ("duration".to_owned(), s.duration.to_string()),
        (
            "cfo_estimate".to_owned(),
            format!("{:.9e}", freq_estimate / (2.0 * PI * s.tx.sps as f64)),
        ),
        ("clock_lock_metric".to_owned(), opt_e(rx.report.clock.metric)),
        ("costas_lock_metric".to_owned(), opt_e(rx.report.costas.metric)),
        ("valid_frames".to_owned(), valid_frames.to_string()),
        (
            "expected_payload".to_owned(),
            expected
                .as_deref()
                .map_or_else(|| "none".to_owned(), |p| Frame { offset: 0, payload: p.to_vec() }.text()),
        ),
    ];
    let report = LinkReport {
        scenario: s.name.as_str().to_owned(),
        seed: s.seed,
        symbols: rx.dibits.len(),
        sync_index: sync.map(|sp| sp.index),
        sync_rotation: sync.map(|sp| sp.rotation),
        post_sync_dibits: rates.map_or(0, |r| r.symbols),
        ser_post_sync: rates.map(|r| r.ser),
        ber_post_sync: rates.map(|r| r.ber),
        evm_rms: evm,
        clock_locked: rx.report.clock.locked,
        clock_first_lock: rx.report.clock.first_lock,
        costas_locked: rx.report.costas.locked,
        costas_first_lock: rx.report.costas.first_lock,
        cma_enabled: rx.report.cma_enabled,
        cma_resets: rx.report.cma_resets,
        rate_estimate,
        freq_estimate,
        frames_found: frames.len(),
        payload_text: most_common_payload(&frames),
        byte_alignment: alignment,
        extra,
    };

    Ok(LinkRun {
        report,
        data,
        received,
        rx,
        sync,
        frames,
    })
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, sum) = it.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| sum / n as f64)
}

fn opt_e(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_owned(), |v| format!("{v:.9e}"))
}

/// Packs from each dibit offset within a byte and keeps the offset with
/// the most expected payloads, then the most frames, then the lowest offset.
fn best_alignment(
    dibits: &[Dibit],
    marker: &FrameMarker,
    pack: UnpackMode,
    expected: Option<&[u8]>,
) -> (Vec<Frame>, Option<usize>) {
    let mut best: Option<((usize, usize), usize, Vec<Frame>)> = None;
    for offset in 0..pack.dibits_per_byte() {
        let bytes = pack_bytes(dibits.get(offset..).unwrap_or(&[]), pack);
        let frames = detect_frames(&bytes, marker);
        let valid = frames
            .iter()
            .filter(|f| Some(f.payload.as_slice()) == expected)
            .count();
        let score = (valid, frames.len());
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, offset, frames));
        }
    }
    let (_, offset, frames) = best.expect("at least one offset");
    (frames, Some(offset))
}

/// Payload text seen most often; ties go to the one seen first.
fn most_common_payload(frames: &[Frame]) -> Option<String> {
    let mut counts: HashMap<&[u8], (usize, usize)> = HashMap::new();
    for (i, f) in frames.iter().enumerate() {
        counts.entry(f.payload.as_slice()).or_insert((0, i)).0 += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(_, (n, first))| (n, std::cmp::Reverse(first)))
        .map(|(_, (_, first))| frames[first].text())
}

/// Writes the five fixed link artifacts into `s.output_dir`.
pub fn write_link_artifacts(s: &Scenario, run: &LinkRun) -> Result<Vec<PathBuf>> {
    let a = &s.analysis;
    let dir = &s.output_dir;
    let sps = s.tx.sps;

    let psd = export_psd(&run.received, a.nfft, a.psd_overlap)?;
    let rows: Vec<Vec<String>> = psd
        .iter()
        .map(|b| vec![format!("{:.8}", b.freq), format!("{:.4}", b.power_db)])
        .collect();
    write_table(dir.join(PSD_FILE), &["freq_cycles_per_sample", "power_db"], &rows)?;

    let rows: Vec<Vec<String>> = export_constellation(&run.rx.symbols, a.constellation_points)
        .iter()
        .map(|(re, im)| vec![format!("{re:.8}"), format!("{im:.8}")])
        .collect();
    write_table(dir.join(CONSTELLATION_FILE), &["re", "im"], &rows)?;

    let matched = fir_filter(&s.tx.pulse()?, &run.received);
    let phase = estimate_symbol_phase(&matched, sps);
    let traces = export_eye(&matched, sps, a.eye_span, phase);
    let first = traces.len().saturating_sub(a.eye_traces);
    let mut rows = Vec::new();
    for (t, trace) in traces[first..].iter().enumerate() {
        for (i, v) in trace.iter().enumerate() {
            rows.push(vec![
                t.to_string(),
                i.to_string(),
                format!("{:.8}", v.re),
                format!("{:.8}", v.im),
            ]);
        }
    }
    write_table(dir.join(EYE_FILE), &["trace", "sample", "re", "im"], &rows)?;

    write_file(&dir.join(DIBITS_FILE), &run.rx.dibits)?;
    write_file(&dir.join(REPORT_FILE), run.report.to_text().as_bytes())?;

    Ok([PSD_FILE, CONSTELLATION_FILE, EYE_FILE, DIBITS_FILE, REPORT_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect())
}

/// Acceptance thresholds for the three data-source experiments.
pub(crate) fn link_checks(s: &Scenario, r: &LinkReport) -> Vec<Check> {
    let mut checks = vec![
        Check::new("clock_locked", r.clock_locked, format!("first_lock={:?}", r.clock_first_lock)),
        Check::new("costas_locked", r.costas_locked, format!("first_lock={:?}", r.costas_first_lock)),
    ];
    match s.name {
        ScenarioKind::Sequence1 => {
            let min_region = s.duration * 2 / 5;
            checks.push(Check::new(
                "sync_index_positive",
                r.sync_index.is_some_and(|i| i > 0),
                format!("sync_index={:?}", r.sync_index),
            ));
            checks.push(Check::new(
                "post_sync_ser_zero",
                r.ser_post_sync == Some(0.0) && r.post_sync_dibits >= min_region,
                format!(
                    "ser={:?} over {} dibits (need >= {min_region})",
                    r.ser_post_sync, r.post_sync_dibits
                ),
            ));
        }
        ScenarioKind::Sequence2 => {
            let expected = s
                .expected_payload()
                .map(|p| Frame { offset: 0, payload: p }.text());
            checks.push(Check::new(
                "frames_found",
                r.frames_found >= 1,
                format!("frames_found={}", r.frames_found),
            ));
            checks.push(Check::new(
                "payload_text",
                expected.is_none() || r.payload_text == expected,
                format!("payload={:?} expected={:?}", r.payload_text, expected),
            ));
        }
        ScenarioKind::RandomUniform => {
            checks.push(Check::new(
                "sync_found",
                r.sync_index.is_some(),
                format!("sync_index={:?}", r.sync_index),
            ));
            checks.push(Check::new(
                "post_sync_ser",
                r.ser_post_sync.is_some_and(|v| v < 1e-3),
                format!("ser={:?} (need < 1e-3)", r.ser_post_sync),
            ));
        }
        ScenarioKind::BerSweep | ScenarioKind::Ablation => {}
    }
    checks
}
