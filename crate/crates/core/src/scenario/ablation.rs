use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    link::run_link, write_file, Check, Scenario, ScenarioKind, ScenarioOutcome, ABLATION_FILE,
    REPORT_FILE,
};
use crate::analysis::{write_table, Frame, LinkReport};
use crate::rng::derive_seed;
use crate::tx::{ByteSource, UnpackMode};
use crate::{Error, Result};

/// Extra axes of the ablation grid. Differential coding on/off and the
/// transmitter's MSB/LSB marker unpacking are always both covered; the
/// receiver always packs with `analysis.pack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    /// Multipliers applied to both tracking-loop bandwidths.
    pub bandwidth_scales: Vec<f64>,
    /// Forced carrier-lock rotations, in quarter turns.
    pub rotations: Vec<u8>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            bandwidth_scales: vec![1.0, 4.0],
            rotations: vec![0, 1],
        }
    }
}

impl AblationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bandwidth_scales.is_empty()
            || self.bandwidth_scales.iter().any(|b| !(b.is_finite() && *b > 0.0))
        {
            return Err(Error::invalid(
                "ablation.bandwidth_scales",
                "needs at least one positive finite scale",
            ));
        }
        if self.rotations.is_empty() || self.rotations.iter().any(|&r| r > 3) {
            return Err(Error::invalid(
                "ablation.rotations",
                "needs at least one value in 0..=3",
            ));
        }
        Ok(())
    }
}

/// One cell of the ablation grid and what the framing stage made of it.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationCell {
    pub differential: bool,
    pub tx_unpack: UnpackMode,
    pub bandwidth_scale: f64,
    pub rotation: u8,
    pub report: LinkReport,
    /// At least one frame, and the most common payload is the expected one.
    pub success: bool,
}

fn cell_scenarios(s: &Scenario) -> Vec<(Scenario, f64)> {
    let mut cells = Vec::new();
    for differential in [true, false] {
        for unpack in [UnpackMode::MsbFirst, UnpackMode::LsbFirst] {
            for &scale in &s.ablation.bandwidth_scales {
                for &rotation in &s.ablation.rotations {
                    let mut c = s.clone();
                    c.name = ScenarioKind::Sequence2;
                    c.tx.differential = differential;
                    c.unpack = Some(unpack);
                    c.rx = s.rx.clone().with_bandwidth_scale(scale);
                    c.rotation = rotation;
                    c.seed = derive_seed(s.seed, cells.len() as u64);
                    cells.push((c, scale));
                }
            }
        }
    }
    cells
}

/// Reruns the marker-framed sequence over the whole grid, one cell per
/// thread, each cell on its own seed stream derived from the cell index.
pub fn run_ablation(s: &Scenario) -> Result<Vec<AblationCell>> {
    s.validate()?;
    if !matches!(s.byte_source(), ByteSource::Vector { .. }) {
        return Err(Error::invalid("source", "ablation needs a vector source"));
    }
    cell_scenarios(s)
        .par_iter()
        .map(|(c, scale)| {
            let run = run_link(c)?;
            let expected = c.expected_payload();
            let payload_ok = match (&expected, &run.report.payload_text) {
                (Some(p), Some(t)) => Frame { offset: 0, payload: p.clone() }.text() == *t,
                (None, _) => true,
                (Some(_), None) => false,
            };
            Ok(AblationCell {
                differential: c.tx.differential,
                tx_unpack: c.unpack_mode(),
                bandwidth_scale: *scale,
                rotation: c.rotation,
                success: run.report.frames_found >= 1 && payload_ok,
                report: run.report,
            })
        })
        .collect()
}

pub(crate) fn run_ablation_scenario(s: &Scenario) -> Result<ScenarioOutcome> {
    let cells = run_ablation(s)?;
    let rows: Vec<Vec<String>> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                i.to_string(),
                c.differential.to_string(),
                c.tx_unpack.as_str().to_owned(),
                format!("{}", c.bandwidth_scale),
                (u32::from(c.rotation) * 90).to_string(),
                c.report.sync_index.map_or_else(|| "none".to_owned(), |v| v.to_string()),
                c.report.frames_found.to_string(),
                c.report
                    .payload_text
                    .as_deref()
                    .map_or_else(|| "none".to_owned(), |t| t.escape_default().to_string()),
                c.success.to_string(),
            ]
        })
        .collect();
    let table = s.output_dir.join(ABLATION_FILE);
    write_table(
        &table,
        &[
            "cell",
            "differential",
            "tx_unpack",
            "bandwidth_scale",
            "rotation_deg",
            "sync_index",
            "frames_found",
            "payload_text",
            "success",
        ],
        &rows,
    )?;

    let find = |diff: bool, rot: u8| {
        cells.iter().find(|c| {
            c.differential == diff
                && c.tx_unpack == UnpackMode::MsbFirst
                && c.bandwidth_scale == 1.0
                && c.rotation == rot
        })
    };
    let cell_check = |name: &str, cell: Option<&AblationCell>, ok: fn(&AblationCell) -> bool| match cell {
        Some(c) => Check::new(
            name,
            ok(c),
            format!("frames_found={} payload={:?}", c.report.frames_found, c.report.payload_text),
        ),
        None => Check::new(name, false, "cell not in grid"),
    };
    let checks = vec![
        cell_check("control_cell_succeeds", find(true, 0), |c| c.success),
        cell_check("no_differential_rotated_has_no_frames", find(false, 1), |c| {
            c.report.frames_found == 0
        }),
        cell_check("differential_rotated_succeeds", find(true, 1), |c| c.success),
    ];

    let extra = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("cell_{i}_success"), c.success.to_string()))
        .collect();
    let report = LinkReport {
        scenario: s.name.as_str().to_owned(),
        seed: s.seed,
        symbols: s.duration,
        frames_found: cells.iter().map(|c| c.report.frames_found).sum(),
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
