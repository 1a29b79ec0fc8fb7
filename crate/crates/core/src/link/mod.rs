//! The BICM-OFDM link chain: channel coding, bit interleaving, cyclic rate
//! matching, Gray QPSK, per-subcarrier fading with zero-forcing
//! equalization, soft demapping and decoding.

mod codec;
mod frame;
mod interleaver;
mod qpsk;
mod rate_match;

pub use codec::{codec_by_name, Codec, ConvK7R13, CODEC_CONV_K7_R13};
pub use frame::{estimate_fep_mc, uncoded_bit_errors, FepEstimate, LinkChain};
pub use interleaver::Interleaver;
pub use qpsk::{demap_llr, modulate_qpsk, ModulatedFrame};
pub use rate_match::{derate_match, rate_match};
