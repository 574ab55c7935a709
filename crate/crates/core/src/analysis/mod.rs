//! Post-processing: sync search, marker framing, error rates, EVM, and
//! table exporters for spectra, constellations and eye diagrams.

mod export;
mod frames;
mod metrics;
mod report;
mod sync;

pub use export::{
    estimate_symbol_phase, export_constellation, export_eye, export_psd, write_table, PsdBin,
};
pub use frames::{detect_frames, Frame, FrameMarker};
pub use metrics::{compute_error_rates, compute_evm, evm_tail, ErrorRates};
pub use report::LinkReport;
pub use sync::{find_stream_alignment, find_sync, SyncPoint};
