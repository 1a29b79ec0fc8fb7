use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unit-energy Gray-mapped QPSK symbols of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedFrame {
    pub symbols: Vec<Complex64>,
}

/// Bit pair `(b_I, b_Q)` → `((1-2b_I) + j(1-2b_Q)) / √2`.
pub fn modulate_qpsk(bits: &[u8]) -> Result<ModulatedFrame> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    let a = 1.0 / SQRT_2;
    let symbols = bits
        .chunks_exact(2)
        .map(|p| Complex64::new(a * (1.0 - 2.0 * p[0] as f64), a * (1.0 - 2.0 * p[1] as f64)))
        .collect();
    Ok(ModulatedFrame { symbols })
}

/// Exact Gray-QPSK LLRs of a zero-forced symbol whose post-equalization
/// SINR is `sinr` (positive favours bit 0). A zero SINR is an erasure.
pub fn demap_llr(equalized: Complex64, sinr: f64) -> (f64, f64) {
    if sinr == 0.0 {
        return (0.0, 0.0);
    }
    let scale = 2.0 * SQRT_2 * sinr;
    (scale * equalized.re, scale * equalized.im)
}
