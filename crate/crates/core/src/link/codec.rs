use crate::error::{Error, Result};

pub const CODEC_CONV_K7_R13: &str = "conv_k7_r13";

/// A binary channel code. LLRs follow the convention that positive values
/// favour bit 0.
pub trait Codec: Send + Sync {
    fn name(&self) -> &'static str;

    /// Nominal rate of the unpunctured, unrepeated code.
    fn mother_rate(&self) -> f64;

    /// Codeword length L for a payload of `payload_bits`.
    fn coded_len(&self, payload_bits: usize) -> usize;

    fn encode(&self, payload: &[u8]) -> Vec<u8>;

    fn decode(&self, llrs: &[f64], payload_bits: usize) -> Vec<u8>;
}

pub fn codec_by_name(name: &str) -> Result<Box<dyn Codec>> {
    match name {
        CODEC_CONV_K7_R13 => Ok(Box::new(ConvK7R13)),
        other => Err(Error::Config(format!(
            "unknown codec `{other}` (available: {CODEC_CONV_K7_R13})"
        ))),
    }
}

const CONSTRAINT: usize = 7;
const MEMORY: usize = CONSTRAINT - 1;
const STATES: usize = 1 << MEMORY;
const GENERATORS: [u32; 3] = [0o133, 0o171, 0o165];

/// Rate-1/3, constraint-length-7 convolutional code (generators 133, 171,
/// 165 octal), zero-tail terminated, decoded by a soft-decision Viterbi
/// search.
///
/// The 7-bit register holds the current input in its top bit; the state is
/// the six most recent inputs with the newest in bit 5.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConvK7R13;

impl ConvK7R13 {
    fn branch_output(state: usize, input: u8) -> [u8; 3] {
        let reg = ((input as u32) << MEMORY) | state as u32;
        GENERATORS.map(|g| ((reg & g).count_ones() & 1) as u8)
    }

    fn next_state(state: usize, input: u8) -> usize {
        ((input as usize) << (MEMORY - 1)) | (state >> 1)
    }
}

impl Codec for ConvK7R13 {
    fn name(&self) -> &'static str {
        CODEC_CONV_K7_R13
    }

    fn mother_rate(&self) -> f64 {
        1.0 / 3.0
    }

    fn coded_len(&self, payload_bits: usize) -> usize {
        3 * (payload_bits + MEMORY)
    }

    fn encode(&self, payload: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coded_len(payload.len()));
        let mut state = 0usize;
        for &bit in payload.iter().chain(std::iter::repeat_n(&0u8, MEMORY)) {
            out.extend_from_slice(&Self::branch_output(state, bit));
            state = Self::next_state(state, bit);
        }
        out
    }

    fn decode(&self, llrs: &[f64], payload_bits: usize) -> Vec<u8> {
        let steps = payload_bits + MEMORY;
        assert_eq!(
            llrs.len(),
            3 * steps,
            "LLR count must match the codeword length"
        );

        // Branch outputs mapped to ±1 for every (state, input).
        let mut signs = [[[0.0f64; 3]; 2]; STATES];
        for (s, row) in signs.iter_mut().enumerate() {
            for input in 0..2u8 {
                let out = Self::branch_output(s, input);
                row[input as usize] = out.map(|c| 1.0 - 2.0 * c as f64);
            }
        }

        let mut metric = [f64::NEG_INFINITY; STATES];
        metric[0] = 0.0;
        let mut next = [0.0f64; STATES];
        // One bit per destination state: which predecessor survived.
        let mut survivors: Vec<u64> = Vec::with_capacity(steps);

        for t in 0..steps {
            let l = &llrs[3 * t..3 * t + 3];
            let mut decisions = 0u64;
            for (dest, slot) in next.iter_mut().enumerate() {
                let input = dest >> (MEMORY - 1);
                let base = (dest & (STATES / 2 - 1)) << 1;
                let cand = |low: usize| {
                    let prev = base | low;
                    let s = &signs[prev][input];
                    metric[prev] + s[0] * l[0] + s[1] * l[1] + s[2] * l[2]
                };
                let (m0, m1) = (cand(0), cand(1));
                if m1 > m0 {
                    *slot = m1;
                    decisions |= 1 << dest;
                } else {
                    *slot = m0;
                }
            }
            metric = next;
            survivors.push(decisions);
        }

        // Zero-tail termination: trace back from state 0.
        let mut bits = vec![0u8; steps];
        let mut state = 0usize;
        for t in (0..steps).rev() {
            bits[t] = (state >> (MEMORY - 1)) as u8;
            let low = ((survivors[t] >> state) & 1) as usize;
            state = ((state & (STATES / 2 - 1)) << 1) | low;
        }
        bits.truncate(payload_bits);
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn hard_llrs(code: &[u8]) -> Vec<f64> {
        code.iter()
            .map(|&c| if c == 0 { 1e9 } else { -1e9 })
            .collect()
    }

    #[test]
    fn impulse_response_is_the_generators() {
        let code = ConvK7R13.encode(&[1]);
        assert_eq!(code.len(), 21);
        // Output bits at time t are the taps of each generator read MSB first.
        for (i, g) in GENERATORS.iter().enumerate() {
            let taps: Vec<u8> = (0..7).map(|t| code[3 * t + i]).collect();
            let expect: Vec<u8> = (0..7).rev().map(|b| ((g >> b) & 1) as u8).collect();
            assert_eq!(taps, expect, "generator {g:o}");
        }
    }

    #[test]
    fn zero_tail_returns_to_zero_state() {
        let mut rng = rng_from_seed(1);
        let payload: Vec<u8> = (0..40).map(|_| rng.random_range(0..2)).collect();
        let code = ConvK7R13.encode(&payload);
        assert_eq!(code.len(), ConvK7R13.coded_len(40));
    }

    #[test]
    fn noiseless_roundtrip() {
        let mut rng = rng_from_seed(9);
        for len in [1usize, 2, 7, 20, 163] {
            let payload: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
            let code = ConvK7R13.encode(&payload);
            assert_eq!(ConvK7R13.decode(&hard_llrs(&code), len), payload);
        }
    }

    #[test]
    fn corrects_scattered_errors() {
        let mut rng = rng_from_seed(4);
        let payload: Vec<u8> = (0..100).map(|_| rng.random_range(0..2)).collect();
        let code = ConvK7R13.encode(&payload);
        let mut llrs: Vec<f64> = code
            .iter()
            .map(|&c| if c == 0 { 1.0 } else { -1.0 })
            .collect();
        // Free distance of this code is 15: a handful of well separated flips is harmless.
        for i in (5..llrs.len()).step_by(40) {
            llrs[i] = -llrs[i];
        }
        assert_eq!(ConvK7R13.decode(&llrs, 100), payload);
    }

    #[test]
    fn registry() {
        assert_eq!(
            codec_by_name("conv_k7_r13").unwrap().name(),
            CODEC_CONV_K7_R13
        );
        assert!(codec_by_name("turbo").is_err());
    }
}
