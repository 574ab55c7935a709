//! A complete single-carrier QPSK link in software.
//!
//! The transmit side turns bytes into a root-raised-cosine shaped baseband
//! stream ([`tx`]). [`channel`] stands in for the radio hop and injects
//! multipath, timing skew, carrier offset and white noise. The receive side
//! ([`rx`]) recovers the symbol clock with a polyphase filterbank, equalizes
//! blindly with CMA, tracks carrier phase with a fourth-order Costas loop,
//! and slices symbols back into dibits and bytes. [`analysis`] measures what
//! came out, and [`scenario`] ties it together into reproducible runs.
//!
//! ```
//! use qpsk_link::{channel::ChannelConfig, rx::RxConfig, tx::{self, TxConfig}};
//!
//! let cfg = TxConfig::default();
//! let data: Vec<u8> = (0..2000).map(|i| (i % 4) as u8).collect();
//! let samples = tx::transmit_dibits(&data, &cfg).unwrap();
//! let received = qpsk_link::channel::run_channel(&samples, &ChannelConfig::ideal(), cfg.sps).unwrap();
//! let out = qpsk_link::rx::run_rx(&received, &RxConfig::matching(&cfg)).unwrap();
//! assert_eq!(out.dibits.len(), out.symbols.len());
//! ```

pub mod analysis;
pub mod channel;
pub mod constellation;
pub mod dsp;
mod error;
pub mod rng;
pub mod rx;
pub mod scenario;
pub mod tx;

pub use error::{Error, Result};

/// One baseband I/Q sample.
pub type ComplexSample = num_complex::Complex64;

/// A 2-bit symbol value in `0..4`.
pub type Dibit = u8;
