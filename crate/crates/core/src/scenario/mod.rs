//! Reproducible end-to-end runs described by a TOML scenario file.
//!
//! A scenario names one of five experiments, carries the transmitter,
//! channel and loop settings, and fixes the seed from which every random
//! stream in the run is derived. [`run_scenario`] executes it and writes
//! its artifacts under `output_dir`.
//!
//! ```
//! use qpsk_link::scenario::{Scenario, ScenarioKind};
//!
//! let s = Scenario::from_toml_str(r#"
//!     name = "sequence1"
//!     duration = 20000
//!     seed = 7
//!
//!     [channel]
//!     snr_eb_n0_db = 25.0
//! "#).unwrap();
//! assert_eq!(s.name, ScenarioKind::Sequence1);
//! let run = qpsk_link::scenario::run_link(&s).unwrap();
//! assert!(run.report.sync_index.unwrap() > 0);
//! assert_eq!(run.report.ser_post_sync, Some(0.0));
//! ```

mod ablation;
mod link;
mod sweep;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::rng::derive_seed;
use crate::rx::{LoopConfig, RxConfig};
use crate::tx::{ByteSource, TxConfig, UnpackMode};
use crate::{Error, Result};

pub use ablation::{run_ablation, AblationCell, AblationConfig};
pub use link::{run_link, write_link_artifacts, LinkRun};
pub use sweep::{genie_ber, q_function, run_ber_sweep, SweepConfig, SweepPoint};

use crate::analysis::LinkReport;

/// Fixed artifact file names.
pub const PSD_FILE: &str = "psd.tsv";
pub const CONSTELLATION_FILE: &str = "constellation.tsv";
pub const EYE_FILE: &str = "eye.tsv";
pub const DIBITS_FILE: &str = "rx_dibits.bin";
pub const REPORT_FILE: &str = "report.txt";
pub const SWEEP_FILE: &str = "ber_sweep.tsv";
pub const ABLATION_FILE: &str = "ablation.tsv";

/// Fewest symbols a statistics scenario may run.
pub const MIN_DURATION: usize = 10_000;
/// Most symbols a single link run may request.
pub const MAX_DURATION: usize = 50_000_000;

/// The 12-byte marker-framed message: a `0, 255` prefix and "HelloWorld".
pub const SEQUENCE2: [u8; 12] = [0, 255, 72, 101, 108, 108, 111, 87, 111, 114, 108, 100];
/// The repeating four-value sequence.
pub const SEQUENCE1: [u8; 4] = [0, 1, 2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    RandomUniform,
    Sequence1,
    Sequence2,
    BerSweep,
    Ablation,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::RandomUniform => "random_uniform",
            ScenarioKind::Sequence1 => "sequence1",
            ScenarioKind::Sequence2 => "sequence2",
            ScenarioKind::BerSweep => "ber_sweep",
            ScenarioKind::Ablation => "ablation",
        }
    }
}

/// Measurement settings shared by link runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Periods of a repeating sequence that must match to declare sync.
    pub k_periods: usize,
    /// Consecutive matches required to declare sync on random data.
    pub align_run: usize,
    /// Largest RX-minus-TX dibit delay searched on random data.
    pub max_lag: usize,
    pub nfft: usize,
    pub psd_overlap: usize,
    pub constellation_points: usize,
    /// Eye trace length in symbols.
    pub eye_span: usize,
    /// Number of final eye traces exported.
    pub eye_traces: usize,
    /// Tail fraction of the symbol stream used for EVM and steady-state
    /// loop estimates.
    pub tail_fraction: f64,
    pub marker_prefix: [u8; 2],
    pub payload_len: usize,
    /// Dibit order used to pack recovered dibits into bytes.
    pub pack: UnpackMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            k_periods: 3,
            align_run: 12,
            max_lag: 256,
            nfft: 1024,
            psd_overlap: 512,
            constellation_points: 2000,
            eye_span: 2,
            eye_traces: 200,
            tail_fraction: 0.25,
            marker_prefix: [0, 255],
            payload_len: 10,
            pack: UnpackMode::MsbFirst,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_periods < 2 {
            return Err(Error::invalid("analysis.k_periods", "must be at least 2"));
        }
        if self.align_run == 0 {
            return Err(Error::invalid("analysis.align_run", "must be at least 1"));
        }
        if self.nfft < 2 || !self.nfft.is_power_of_two() {
            return Err(Error::invalid("analysis.nfft", "must be a power of two"));
        }
        if self.psd_overlap >= self.nfft {
            return Err(Error::invalid("analysis.psd_overlap", "must be smaller than nfft"));
        }
        if self.eye_span == 0 {
            return Err(Error::invalid("analysis.eye_span", "must be at least 1"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::invalid("analysis.tail_fraction", "must lie in (0, 1]"));
        }
        if self.marker_prefix[0] == self.marker_prefix[1] {
            return Err(Error::invalid("analysis.marker_prefix", "bytes must differ"));
        }
        if self.pack == UnpackMode::Low2 {
            return Err(Error::invalid("analysis.pack", "must be msb_first or lsb_first"));
        }
        Ok(())
    }
}

/// One experiment, as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: ScenarioKind,
    /// Data symbols per link run.
    #[serde(default = "default_duration")]
    pub duration: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Byte source; defaults depend on `name`.
    #[serde(default)]
    pub source: Option<ByteSource>,
    /// Byte-to-dibit order at the transmitter; defaults depend on `name`.
    #[serde(default)]
    pub unpack: Option<UnpackMode>,
    /// Quarter turns applied to the received stream, emulating a carrier
    /// loop that settled on a rotated lock point.
    #[serde(default)]
    pub rotation: u8,
    #[serde(default)]
    pub tx: TxConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub rx: LoopConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub ablation: AblationConfig,
}

fn default_duration() -> usize {
    100_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Scenario {
    /// A scenario with every setting at its default.
    pub fn new(name: ScenarioKind) -> Self {
        Self {
            name,
            duration: default_duration(),
            seed: 0,
            output_dir: PathBuf::from("out").join(name.as_str()),
            source: None,
            unpack: None,
            rotation: 0,
            tx: TxConfig::default(),
            channel: ChannelConfig::default(),
            rx: LoopConfig::default(),
            analysis: AnalysisConfig::default(),
            sweep: SweepConfig::default(),
            ablation: AblationConfig::default(),
        }
    }

    /// Parses and validates a scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario fields are all TOML-representable")
    }

    pub fn validate(&self) -> Result<()> {
        match self.name {
            ScenarioKind::BerSweep => self.sweep.validate()?,
            _ => {
                if self.duration < MIN_DURATION {
                    return Err(Error::invalid(
                        "duration",
                        format!("must be at least {MIN_DURATION} symbols, got {}", self.duration),
                    ));
                }
                if self.duration > MAX_DURATION {
                    return Err(Error::invalid(
                        "duration",
                        format!("must not exceed {MAX_DURATION} symbols"),
                    ));
                }
            }
        }
        if self.rotation > 3 {
            return Err(Error::invalid("rotation", "must be 0, 1, 2 or 3 quarter turns"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::invalid("output_dir", "must not be empty"));
        }
        if let Some(ByteSource::RandomUniform { lo, hi, .. }) = &self.source {
            if lo >= hi || *hi > 256 {
                return Err(Error::invalid("source", "random range needs 0 <= lo < hi <= 256"));
            }
        }
        if let Some(ByteSource::Vector { bytes }) = &self.source {
            if bytes.is_empty() {
                return Err(Error::invalid("source.bytes", "must not be empty"));
            }
        }
        if self.unpack_mode() == UnpackMode::Low2 {
            let too_big = match self.byte_source() {
                ByteSource::RandomUniform { hi, .. } => hi > 4,
                ByteSource::Vector { bytes } => bytes.iter().any(|&b| b >= 4),
            };
            if too_big {
                return Err(Error::invalid("unpack", "low2 needs every source byte below 4"));
            }
        }
        self.tx.validate()?;
        self.channel.validate()?;
        self.rx_config().validate()?;
        self.analysis.validate()?;
        self.ablation.validate()?;
        Ok(())
    }

    /// The byte source in effect. A random source's seed is mixed with the
    /// scenario seed, so `--seed` changes the data too.
    pub fn byte_source(&self) -> ByteSource {
        let src = self.source.clone().unwrap_or_else(|| match self.name {
            ScenarioKind::Sequence1 => ByteSource::Vector { bytes: SEQUENCE1.to_vec() },
            ScenarioKind::Sequence2 | ScenarioKind::Ablation => {
                ByteSource::Vector { bytes: SEQUENCE2.to_vec() }
            }
            ScenarioKind::RandomUniform | ScenarioKind::BerSweep => {
                ByteSource::RandomUniform { lo: 0, hi: 4, seed: 0 }
            }
        });
        match src {
            ByteSource::RandomUniform { lo, hi, seed } => ByteSource::RandomUniform {
                lo,
                hi,
                seed: derive_seed(derive_seed(self.seed, 1), seed),
            },
            v => v,
        }
    }

    /// The transmitter's byte-to-dibit order in effect.
    pub fn unpack_mode(&self) -> UnpackMode {
        self.unpack.unwrap_or(match self.name {
            ScenarioKind::RandomUniform | ScenarioKind::Sequence1 | ScenarioKind::BerSweep => {
                UnpackMode::Low2
            }
            ScenarioKind::Sequence2 | ScenarioKind::Ablation => UnpackMode::MsbFirst,
        })
    }

    /// Channel settings with the noise seed mixed with the scenario seed.
    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            seed: derive_seed(derive_seed(self.seed, 2), self.channel.seed),
            ..self.channel.clone()
        }
    }

    pub fn rx_config(&self) -> RxConfig {
        RxConfig::with_loops(&self.tx, self.rx.clone())
    }

    /// Payload the framing check expects: the `payload_len` bytes after the
    /// marker prefix in a repeating vector source.
    pub fn expected_payload(&self) -> Option<Vec<u8>> {
        let ByteSource::Vector { bytes } = self.byte_source() else {
            return None;
        };
        let n = bytes.len();
        let [a, b] = self.analysis.marker_prefix;
        (0..n)
            .find(|&i| bytes[i] == a && bytes[(i + 1) % n] == b)
            .map(|i| (0..self.analysis.payload_len).map(|j| bytes[(i + 2 + j) % n]).collect())
    }
}

/// One pass/fail line of a scenario's acceptance check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// What a scenario produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub report: LinkReport,
    pub checks: Vec<Check>,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs a scenario, writes its artifacts under `output_dir`, and evaluates
/// its acceptance checks. Failing checks do not make this an error.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutcome> {
    s.validate()?;
    std::fs::create_dir_all(&s.output_dir).map_err(|e| Error::Io {
        path: s.output_dir.display().to_string(),
        message: e.to_string(),
    })?;
    match s.name {
        ScenarioKind::BerSweep => sweep::run_sweep_scenario(s),
        ScenarioKind::Ablation => ablation::run_ablation_scenario(s),
        _ => {
            let run = run_link(s)?;
            let files = write_link_artifacts(s, &run)?;
            let checks = link::link_checks(s, &run.report);
            Ok(ScenarioOutcome {
                report: run.report,
                checks,
                files,
            })
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let s = Scenario::from_toml_str("name = \"sequence2\"").unwrap();
        assert_eq!(s.duration, 100_000);
        assert_eq!(s.unpack_mode(), UnpackMode::MsbFirst);
        assert_eq!(s.expected_payload().unwrap(), b"HelloWorld");
        assert_eq!(s.channel, ChannelConfig::bench_lab());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = Scenario::from_toml_str("name = \"sequence1\"\nduration = 50").unwrap_err();
        assert!(e.to_string().contains("duration"), "{e}");
        let e = Scenario::from_toml_str("name = \"sequence1\"\n[tx]\nrolloff = 1.5").unwrap_err();
        assert!(e.to_string().contains("tx.rolloff"), "{e}");
        let e = Scenario::from_toml_str("name = \"sequence1\"\n[channel]\nbogus = 1").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = Scenario::from_toml_str("name = \"sequence3\"").unwrap_err();
        assert!(e.to_string().contains("sequence3"), "{e}");
    }

    #[test]
    fn low2_rejects_wide_sources() {
        let e = Scenario::from_toml_str(
            "name = \"random_uniform\"\n[source]\nkind = \"random_uniform\"\nlo = 0\nhi = 256",
        )
        .unwrap_err();
        assert!(e.to_string().contains("unpack"), "{e}");
    }

    #[test]
    fn toml_round_trip() {
        let s = Scenario::new(ScenarioKind::Ablation);
        let back = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(back, s);
    }
}
