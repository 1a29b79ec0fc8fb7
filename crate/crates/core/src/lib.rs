//! Link-level laboratory for frame-error-probability (FEP) prediction over
//! BICM-OFDM block-fading links.
//!
//! The crate simulates a coded QPSK OFDM link, learns FEP predictors from
//! binary ACK/NACK observations (an EESM baseline and a fully connected
//! network), and scores them by prediction accuracy and by the throughput
//! realized when each one drives per-frame code-rate selection.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod awgn_ref;
pub mod channel;
pub mod dataset;
pub mod eesm;
pub mod error;
pub mod harness;
pub mod link;
pub mod metrics;
pub mod neural;
pub mod oracle;
pub mod rng;
pub mod selection;
pub mod textfmt;
pub mod types;

pub use error::{Error, Result};
pub use types::{sort_sinrs, ConfigSet, Dataset, FrameObservation, LinkConfig, SinrVector};
